//! Problem definition: device Hamiltonian, leads, bias profiles.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matcore::{eig_general, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeadLabel {
    Left,
    Right,
}

impl LeadLabel {
    pub const BOTH: [LeadLabel; 2] = [LeadLabel::Left, LeadLabel::Right];

    pub fn index(self) -> usize {
        match self {
            LeadLabel::Left => 0,
            LeadLabel::Right => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            LeadLabel::Left => LeadLabel::Right,
            LeadLabel::Right => LeadLabel::Left,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            LeadLabel::Left => "L",
            LeadLabel::Right => "R",
        }
    }
}

impl fmt::Display for LeadLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// One wide-band lead.
///
/// The bias rises as `ΔV(t) = ΔV·(1 − e^{−t/a})` and shifts the lead levels
/// rigidly by `Δε(t) = −ΔV(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadSpec {
    pub label: LeadLabel,
    /// Line-width matrix in eV.
    pub lambda: CMatrix,
    /// Asymptotic bias in V.
    pub bias_amplitude: f64,
    /// Turn-on time constant in fs.
    pub smoothing_a: f64,
}

impl LeadSpec {
    pub fn new(label: LeadLabel, lambda: CMatrix, bias_amplitude: f64, smoothing_a: f64) -> Self {
        Self {
            label,
            lambda,
            bias_amplitude,
            smoothing_a,
        }
    }

    /// Lead specified by its settled level shift instead of the bias voltage.
    pub fn with_level_shift(label: LeadLabel, lambda: CMatrix, level_shift: f64, smoothing_a: f64) -> Self {
        Self::new(label, lambda, -level_shift, smoothing_a)
    }

    /// `Δε(t)` in eV.
    pub fn level_shift(&self, t: f64) -> f64 {
        if self.bias_amplitude == 0.0 {
            return 0.0;
        }
        self.bias_amplitude * (-t / self.smoothing_a).exp_m1()
    }

    /// `Δε(∞) = −ΔV`.
    pub fn settled_level_shift(&self) -> f64 {
        -self.bias_amplitude
    }

    /// `∫_{t0}^{t1} Δε(s) ds` in eV·fs.
    pub fn level_shift_integral(&self, t0: f64, t1: f64) -> f64 {
        if self.bias_amplitude == 0.0 {
            return 0.0;
        }
        let a = self.smoothing_a;
        let span = t1 - t0;
        -self.bias_amplitude * (span + a * (-t0 / a).exp() * (-span / a).exp_m1())
    }

    pub fn is_coupled(&self) -> bool {
        self.lambda.max_abs() > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSpec {
    /// Equilibrium device Hamiltonian in eV.
    pub h0: CMatrix,
    /// Capacitive mean-field coupling in eV per electron; zero disables it.
    pub charging_strength: f64,
}

impl DeviceSpec {
    pub fn new(h0: CMatrix) -> Self {
        Self {
            h0,
            charging_strength: 0.0,
        }
    }

    pub fn n_orbitals(&self) -> usize {
        self.h0.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub device: DeviceSpec,
    pub left: LeadSpec,
    pub right: LeadSpec,
    /// Equilibrium chemical potential in eV.
    pub mu0: f64,
    /// Lower cutoff of every energy integral, in eV.
    pub band_bottom: f64,
}

impl SystemSpec {
    pub fn dim(&self) -> usize {
        self.device.n_orbitals()
    }

    pub fn lead(&self, label: LeadLabel) -> &LeadSpec {
        match label {
            LeadLabel::Left => &self.left,
            LeadLabel::Right => &self.right,
        }
    }

    pub fn lead_mut(&mut self, label: LeadLabel) -> &mut LeadSpec {
        match label {
            LeadLabel::Left => &mut self.left,
            LeadLabel::Right => &mut self.right,
        }
    }

    pub fn leads(&self) -> [&LeadSpec; 2] {
        [&self.left, &self.right]
    }

    /// `Λ^L + Λ^R`.
    pub fn lambda_total(&self) -> CMatrix {
        &self.left.lambda + &self.right.lambda
    }

    /// Scalar part of the device shift at time `t`: the mean of the two lead
    /// level shifts plus the optional charging term.
    pub fn device_shift(&self, t: f64, occupation_change: f64) -> f64 {
        0.5 * (self.left.level_shift(t) + self.right.level_shift(t))
            + self.device.charging_strength * occupation_change
    }

    /// Same as [`device_shift`](Self::device_shift) once the bias has settled.
    pub fn settled_device_shift(&self, occupation_change: f64) -> f64 {
        0.5 * (self.left.settled_level_shift() + self.right.settled_level_shift())
            + self.device.charging_strength * occupation_change
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// `h_D(t) = h_D(0) + δh(t)·I`, where `δh` is the mean lead shift plus
/// `charging_strength · (tr σ − reference_occupation)`.
pub fn h_d_at(spec: &SystemSpec, t: f64, sigma: &CMatrix, reference_occupation: f64) -> Result<CMatrix> {
    sigma.ensure_dim(spec.dim())?;
    let change = if spec.device.charging_strength != 0.0 {
        sigma.trace().re - reference_occupation
    } else {
        0.0
    };
    let shift = spec.device_shift(t, change);
    if shift == 0.0 {
        return Ok(spec.device.h0.clone());
    }
    Ok(spec.device.h0.shift_diag(Complex64::new(shift, 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub severity: Severity,
    /// Offending values when the check fails.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, name: impl Into<String>, passed: bool, severity: Severity, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            severity,
            detail,
        });
    }

    /// No failed error-level checks.
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Check> {
        self.checks
            .iter()
            .filter(|c| !c.passed && c.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Check> {
        self.checks
            .iter()
            .filter(|c| !c.passed && c.severity == Severity::Warning)
    }

    pub fn into_result(self) -> Result<()> {
        let msgs: Vec<String> = self
            .errors()
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        if msgs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(msgs.join("; ")))
        }
    }
}

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;

/// Checks every invariant of the specification. Never fails; inspect the
/// report instead.
pub fn validate(spec: &SystemSpec) -> ValidationReport {
    let mut r = ValidationReport::default();
    let n = spec.dim();
    let h0 = &spec.device.h0;

    r.push("h0 dimension", n > 0, Severity::Error, format!("n = {n}"));
    r.push(
        "h0 finite",
        h0.is_finite(),
        Severity::Error,
        String::from("h0 has non-finite entries"),
    );
    let defect = h0.hermiticity_defect();
    r.push(
        "h0 Hermitian",
        defect <= HERMITIAN_TOL * h0.frobenius_norm().max(1.0),
        Severity::Error,
        format!("h0 not Hermitian (defect {defect:.3e})"),
    );
    r.push(
        "charging strength",
        spec.device.charging_strength.is_finite(),
        Severity::Error,
        format!("charging_strength = {}", spec.device.charging_strength),
    );

    let mut lambda_ok = true;
    for lead in spec.leads() {
        let tag = format!("lead {}", lead.label);
        let dim_ok = lead.lambda.dim() == n;
        r.push(
            format!("{tag} lambda dimension"),
            dim_ok,
            Severity::Error,
            format!("lambda is {0}x{0}, device is {n}x{n}", lead.lambda.dim()),
        );
        lambda_ok &= dim_ok;
        if !dim_ok {
            continue;
        }
        if !lead.lambda.is_finite() {
            r.push(
                format!("{tag} lambda finite"),
                false,
                Severity::Error,
                String::from("lambda has non-finite entries"),
            );
            lambda_ok = false;
            continue;
        }
        let defect = lead.lambda.hermiticity_defect();
        let herm = defect <= HERMITIAN_TOL * lead.lambda.frobenius_norm().max(1.0);
        r.push(
            format!("{tag} lambda Hermitian"),
            herm,
            Severity::Error,
            format!("lambda not Hermitian (defect {defect:.3e})"),
        );
        lambda_ok &= herm;
        match min_hermitian_eigenvalue(&lead.lambda) {
            Some(min) => {
                let psd = min >= -PSD_TOL;
                lambda_ok &= psd;
                r.push(
                    format!("{tag} lambda"),
                    psd,
                    Severity::Error,
                    format!("lambda not non-negative definite (smallest eigenvalue {min:.6e} eV)"),
                );
            }
            None => {
                lambda_ok = false;
                r.push(
                    format!("{tag} lambda"),
                    false,
                    Severity::Error,
                    String::from("lambda eigenvalues could not be computed"),
                );
            }
        }
        let a = lead.smoothing_a;
        r.push(
            format!("{tag} smoothing_a"),
            a.is_finite() && a > 0.0,
            Severity::Error,
            format!("smoothing_a must be positive (got {a})"),
        );
        r.push(
            format!("{tag} bias_amplitude"),
            lead.bias_amplitude.is_finite(),
            Severity::Error,
            format!("bias_amplitude must be finite (got {})", lead.bias_amplitude),
        );
    }

    let window_ok = spec.mu0.is_finite()
        && spec.band_bottom.is_finite()
        && spec.band_bottom < spec.mu0;
    r.push(
        "band_bottom",
        window_ok,
        Severity::Error,
        format!(
            "band_bottom must lie below mu0 (band_bottom = {}, mu0 = {})",
            spec.band_bottom, spec.mu0
        ),
    );

    if window_ok && lambda_ok {
        if let Some(max) = max_hermitian_eigenvalue(&spec.lambda_total()) {
            let depth = spec.mu0 - spec.band_bottom;
            r.push(
                "cutoff dominance",
                depth >= 10.0 * max,
                Severity::Warning,
                format!(
                    "mu0 - band_bottom = {depth} eV is less than 10x the largest total line-width {max} eV"
                ),
            );
        }
    }
    r
}

fn hermitian_eigenvalues(m: &CMatrix) -> Option<Vec<f64>> {
    let d = eig_general(&m.hermitian_part()).ok()?;
    Some(d.eigenvalues.iter().map(|z| z.re).collect())
}

fn min_hermitian_eigenvalue(m: &CMatrix) -> Option<f64> {
    hermitian_eigenvalues(m).map(|v| v.into_iter().fold(f64::INFINITY, f64::min))
}

fn max_hermitian_eigenvalue(m: &CMatrix) -> Option<f64> {
    hermitian_eigenvalues(m).map(|v| v.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

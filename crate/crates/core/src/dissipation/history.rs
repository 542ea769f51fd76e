use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::open_hamiltonian;
use crate::device::{LeadLabel, LeadSpec, SystemSpec};
use crate::error::{Error, Result};
use crate::matcore::{eig_general, CMatrix};
use crate::quadrature::{panel_edges, GaussLegendre};
use crate::units::HBAR_EV_FS;

const EXACT_POINTS_PER_PANEL: usize = 20;
const EXACT_MAX_PANEL_WIDTH: f64 = 0.25;

/// Generator data for one integrator step.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryStep {
    /// `h_D` averaged over the step.
    pub h_avg: CMatrix,
    /// Lead level shifts averaged over the step, indexed by [`LeadLabel::index`].
    pub level_shift_avg: [f64; 2],
}

/// Uniformly spaced record of the time-dependent generator, starting at
/// `t = 0`. Step `k` covers `[k·dt, (k+1)·dt]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer {
    dt: f64,
    steps: Vec<HistoryStep>,
}

impl HistoryBuffer {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument("dt must be positive"));
        }
        Ok(Self {
            dt,
            steps: Vec::new(),
        })
    }

    /// Records a synthetic history for a spec with constant `h_D` and constant
    /// lead shifts; mostly useful to compare against closed forms.
    pub fn constant(dt: f64, n_steps: usize, h: &CMatrix, level_shifts: [f64; 2]) -> Result<Self> {
        let mut buf = Self::new(dt)?;
        for _ in 0..n_steps {
            buf.push(h.clone(), level_shifts);
        }
        Ok(buf)
    }

    pub fn push(&mut self, h_avg: CMatrix, level_shift_avg: [f64; 2]) {
        self.steps.push(HistoryStep {
            h_avg,
            level_shift_avg,
        });
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[HistoryStep] {
        &self.steps
    }

    /// End of the recorded interval.
    pub fn covered_time(&self) -> f64 {
        self.dt * self.steps.len() as f64
    }

    /// Sample times `0, dt, …, covered_time()`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps.len()).map(move |k| k as f64 * self.dt)
    }
}

/// `P^(+)_α(t)` from its defining double integral
/// `−(2/π) ∫dε ∫₀ᵗ dτ/ħ  Texp(−i∫_τ^t [h_D − iΛ − Δε^α − ε]/ħ) · Λ^α`.
///
/// For each energy node the inner integral obeys `X ← E_k X + Φ_k` over the
/// recorded steps, where `E_k` is the step propagator and `Φ_k` its exact
/// integral over the step; both come from one eigendecomposition per step.
/// Energies are integrated with 20-point Gauss–Legendre panels no wider than
/// a quarter of the oscillation period `2πħ/t` or 0.25 eV.
///
/// Cost grows as (number of steps) × (number of energy nodes); this is a
/// reference implementation for tests and diagnostics.
pub fn p_plus_exact(history: &HistoryBuffer, lead: &LeadSpec, t: f64, spec: &SystemSpec) -> Result<CMatrix> {
    let n = spec.dim();
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument("time must be finite and non-negative"));
    }
    let dt = history.dt();
    let n_steps = round_steps(t / dt);
    let covered = history.covered_time();
    if t > covered + 1e-9 * dt {
        return Err(Error::InsufficientHistory {
            requested: t,
            available: covered,
        });
    }
    if (n_steps as f64 * dt - t).abs() > 1e-6 * dt {
        return Err(Error::InvalidArgument("t must lie on the history grid"));
    }
    if n_steps == 0 || !lead.is_coupled() {
        return Ok(CMatrix::zeros(n));
    }
    lead.lambda.ensure_dim(n)?;

    let lambda_total = spec.lambda_total();
    let steps: Vec<StepBasis> = history.steps()[..n_steps]
        .iter()
        .map(|s| StepBasis::new(s, lead.label, &lambda_total))
        .collect::<Result<_>>()?;

    let span = spec.mu0 - spec.band_bottom;
    let width = (2.0 * PI * HBAR_EV_FS / t).min(EXACT_MAX_PANEL_WIDTH);
    let panels = (span / width).ceil() as usize;
    let rule = GaussLegendre::new(EXACT_POINTS_PER_PANEL);

    let mut total = CMatrix::zeros(n);
    let mut x = CMatrix::zeros(n);
    let mut scratch = CMatrix::zeros(n);
    for (lo, hi) in panel_edges(spec.band_bottom, spec.mu0, panels) {
        for (eps, w) in rule.mapped(lo, hi) {
            x.as_mut_slice().fill(Complex64::new(0.0, 0.0));
            for step in &steps {
                step.apply(&mut x, &mut scratch, eps, dt);
            }
            for (acc, &v) in total.as_mut_slice().iter_mut().zip(x.as_slice()) {
                *acc += v * w;
            }
        }
    }
    Ok((&total * &lead.lambda).scale_real(-2.0 / PI))
}

fn round_steps(x: f64) -> usize {
    x.round().max(0.0) as usize
}

/// Eigenbasis of one step's generator `h − iΛ − Δε^α`.
struct StepBasis {
    eigenvalues: Vec<Complex64>,
    vectors: CMatrix,
    inverse: CMatrix,
}

impl StepBasis {
    fn new(step: &HistoryStep, lead: LeadLabel, lambda_total: &CMatrix) -> Result<Self> {
        let m = open_hamiltonian(&step.h_avg, lambda_total)
            .shift_diag(Complex64::new(-step.level_shift_avg[lead.index()], 0.0));
        let d = eig_general(&m)?;
        Ok(Self {
            eigenvalues: d.eigenvalues,
            vectors: d.vectors,
            inverse: d.inverse,
        })
    }

    /// `X ← V·(diag(e)·V⁻¹·X + diag(φ)·V⁻¹)` with
    /// `e = exp(−i(λ − ε)dt/ħ)` and `φ = ∫₀^dt exp(−i(λ − ε)u/ħ) du/ħ`.
    fn apply(&self, x: &mut CMatrix, scratch: &mut CMatrix, eps: f64, dt: f64) {
        let n = x.dim();
        let tau = dt / HBAR_EV_FS;
        for i in 0..n {
            let y = (self.eigenvalues[i] - eps) * tau;
            let e = (Complex64::new(0.0, -1.0) * y).exp();
            let phi = step_integral(y, e) * tau;
            for j in 0..n {
                let mut vx = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    vx += self.inverse[(i, k)] * x[(k, j)];
                }
                scratch[(i, j)] = e * vx + phi * self.inverse[(i, j)];
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.vectors[(i, k)] * scratch[(k, j)];
                }
                x[(i, j)] = acc;
            }
        }
    }
}

/// `(1 − e^{−iy}) / (iy)`, given `e = e^{−iy}`.
fn step_integral(y: Complex64, e: Complex64) -> Complex64 {
    if y.norm() < 1e-2 {
        // Σ (−iy)^k / (k+1)!
        let z = Complex64::new(0.0, -1.0) * y;
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..8 {
            term *= z / (k + 1) as f64;
            sum += term;
        }
        sum
    } else {
        (Complex64::new(1.0, 0.0) - e) / (Complex64::new(0.0, 1.0) * y)
    }
}

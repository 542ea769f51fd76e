//! Frequency-domain steady state: Green's functions, transmission, Landauer
//! current, and the stationary density matrix at settled bias.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::device::{LeadLabel, SystemSpec};
use crate::dissipation::{fermi_resolvent_integral, open_hamiltonian, PREFACTOR};
use crate::error::{Error, Result};
use crate::matcore::{eig_general, inverse, CMatrix, EigDecomposition};
use crate::propagate::equilibrium_density;
use crate::quadrature::{panel_edges, GaussLegendre};
use crate::units::HBAR_EV_FS;

/// Transmission normalization: `T = c_T · tr[G^r Λ^R G^a Λ^L]` with `c_T = 4`
/// gives a transmission probability (unity at a symmetric resonance).
pub const TRANSMISSION_SCALE: f64 = 4.0;

/// Relative change tolerated when the number of quadrature points is doubled.
pub const LANDAUER_TOL: f64 = 1e-6;

/// Smallest accepted `|λ_i − λ_j*|` in the stationarity solve.
pub const SYLVESTER_GUARD: f64 = 1e-12;

/// Composite Gauss–Legendre settings for energy integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyQuadrature {
    pub panels: usize,
    pub points: usize,
}

impl Default for EnergyQuadrature {
    fn default() -> Self {
        Self {
            panels: 64,
            points: 20,
        }
    }
}

/// The system with its bias settled.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyConfig {
    pub spec: SystemSpec,
    /// `Δε^α(∞)`, indexed by [`LeadLabel::index`].
    pub level_shifts: [f64; 2],
    /// `h_D(∞)`.
    pub h_inf: CMatrix,
    pub quadrature: EnergyQuadrature,
}

impl SteadyConfig {
    /// Settled configuration for `spec`. With charging enabled the device
    /// shift depends on the stationary occupation, which is found by damped
    /// fixed-point iteration starting from equilibrium.
    pub fn settled(spec: &SystemSpec) -> Result<Self> {
        Self::settled_with(spec, EnergyQuadrature::default())
    }

    pub fn settled_with(spec: &SystemSpec, quadrature: EnergyQuadrature) -> Result<Self> {
        spec.validate().into_result()?;
        let level_shifts = [
            spec.left.settled_level_shift(),
            spec.right.settled_level_shift(),
        ];
        let shifted = |change: f64| {
            spec.device
                .h0
                .shift_diag(Complex64::new(spec.settled_device_shift(change), 0.0))
        };
        let mut cfg = Self::new(spec.clone(), level_shifts, shifted(0.0), quadrature)?;
        if spec.device.charging_strength == 0.0 {
            return Ok(cfg);
        }
        let reference = equilibrium_density(spec)?.occupation();
        let mut change = 0.0;
        const MAX_ITERATIONS: usize = 500;
        for _ in 0..MAX_ITERATIONS {
            let occupation = steady_sigma(&cfg)?.trace().re;
            let target = occupation - reference;
            if (target - change).abs() < 1e-12 {
                return Ok(cfg);
            }
            change += 0.5 * (target - change);
            cfg.h_inf = shifted(change);
        }
        Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
        })
    }

    pub fn new(
        spec: SystemSpec,
        level_shifts: [f64; 2],
        h_inf: CMatrix,
        quadrature: EnergyQuadrature,
    ) -> Result<Self> {
        h_inf.ensure_dim(spec.dim())?;
        if !h_inf.is_hermitian(1e-12 * h_inf.frobenius_norm().max(1.0)) {
            return Err(Error::InvalidArgument("h_inf must be Hermitian"));
        }
        if quadrature.points < 16 || quadrature.panels == 0 {
            return Err(Error::InvalidArgument(
                "energy quadrature needs at least 16 points per panel",
            ));
        }
        Ok(Self {
            spec,
            level_shifts,
            h_inf,
            quadrature,
        })
    }

    /// `μ⁰ + Δε^α(∞)`.
    pub fn chemical_potential(&self, lead: LeadLabel) -> f64 {
        self.spec.mu0 + self.level_shifts[lead.index()]
    }

    fn lambda(&self, lead: LeadLabel) -> &CMatrix {
        &self.spec.lead(lead).lambda
    }
}

/// `G^r(ε) = (ε − h_D(∞) + iΛ)⁻¹`.
pub fn greens_retarded(cfg: &SteadyConfig, eps: f64) -> Result<CMatrix> {
    if !eps.is_finite() {
        return Err(Error::InvalidArgument("energy must be finite"));
    }
    let a = open_hamiltonian(&cfg.h_inf, &cfg.spec.lambda_total())
        .scale_real(-1.0)
        .shift_diag(Complex64::new(eps, 0.0));
    inverse(&a)
}

/// `T(ε) = 4 tr[G^r Λ^R G^a Λ^L]`.
pub fn transmission(cfg: &SteadyConfig, eps: f64) -> Result<f64> {
    if !cfg.spec.right.is_coupled() || !cfg.spec.left.is_coupled() {
        return Ok(0.0);
    }
    let gr = greens_retarded(cfg, eps)?;
    let chain = &(&(&gr * cfg.lambda(LeadLabel::Right)) * &gr.adjoint()) * cfg.lambda(LeadLabel::Left);
    Ok(TRANSMISSION_SCALE * chain.trace().re)
}

/// Steady currents in electrons per fs, positive into the device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyCurrents {
    pub left: f64,
    pub right: f64,
}

impl SteadyCurrents {
    pub fn get(&self, lead: LeadLabel) -> f64 {
        match lead {
            LeadLabel::Left => self.left,
            LeadLabel::Right => self.right,
        }
    }
}

/// `J_R = −J_L = (1/πħ) ∫_{μ_L}^{μ_R} T(ε) dε` at zero temperature, with a
/// factor 2 for spin and `μ_α = μ⁰ + Δε^α(∞)`.
pub fn landauer_current(cfg: &SteadyConfig) -> Result<SteadyCurrents> {
    let mu_l = cfg.chemical_potential(LeadLabel::Left);
    let mu_r = cfg.chemical_potential(LeadLabel::Right);
    if mu_l == mu_r {
        return Ok(SteadyCurrents {
            left: 0.0,
            right: 0.0,
        });
    }
    let (lo, hi) = if mu_l < mu_r { (mu_l, mu_r) } else { (mu_r, mu_l) };
    let q = cfg.quadrature;
    let coarse = window_integral(cfg, lo, hi, q.panels, q.points)?;
    let fine = window_integral(cfg, lo, hi, q.panels, 2 * q.points)?;
    let change = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if change > LANDAUER_TOL && (fine - coarse).abs() > 1e-15 {
        return Err(Error::QuadratureNotConverged {
            relative_change: change,
        });
    }
    let magnitude = fine / (PI * HBAR_EV_FS);
    let right = if mu_r > mu_l { magnitude } else { -magnitude };
    Ok(SteadyCurrents {
        left: -right,
        right,
    })
}

fn window_integral(cfg: &SteadyConfig, lo: f64, hi: f64, panels: usize, points: usize) -> Result<f64> {
    let rule = GaussLegendre::new(points);
    let mut acc = 0.0;
    for (a, b) in panel_edges(lo, hi, panels) {
        for (e, w) in rule.mapped(a, b) {
            acc += w * transmission(cfg, e)?;
        }
    }
    Ok(acc)
}

/// Transmission sampled on `points` equally spaced energies in `[start, end]`.
pub fn transmission_curve(cfg: &SteadyConfig, start: f64, end: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    let step = if points > 1 {
        (end - start) / (points - 1) as f64
    } else {
        0.0
    };
    (0..points)
        .map(|k| {
            let e = start + k as f64 * step;
            Ok((e, transmission(cfg, e)?))
        })
        .collect()
}

fn steady_decomposition(cfg: &SteadyConfig) -> Result<EigDecomposition> {
    eig_general(&open_hamiltonian(&cfg.h_inf, &cfg.spec.lambda_total()))
}

/// `P^α(∞) = −(2i/π) ∫ (ε − h_D(∞) + iΛ + Δε^α(∞))⁻¹ dε · Λ^α`.
pub fn p_alpha_steady(cfg: &SteadyConfig, lead: LeadLabel) -> Result<CMatrix> {
    let lambda_alpha = cfg.lambda(lead);
    if !cfg.spec.lead(lead).is_coupled() {
        return Ok(CMatrix::zeros(cfg.spec.dim()));
    }
    let d = steady_decomposition(cfg)?;
    p_alpha_from(cfg, &d, lead, lambda_alpha)
}

fn p_alpha_from(cfg: &SteadyConfig, d: &EigDecomposition, lead: LeadLabel, lambda_alpha: &CMatrix) -> Result<CMatrix> {
    let shifted = EigDecomposition {
        eigenvalues: d
            .eigenvalues
            .iter()
            .map(|&l| l - cfg.level_shifts[lead.index()])
            .collect(),
        vectors: d.vectors.clone(),
        inverse: d.inverse.clone(),
    };
    let r = fermi_resolvent_integral(&shifted, 0.0, cfg.spec.mu0, cfg.spec.band_bottom)?;
    Ok((&r * lambda_alpha).scale(PREFACTOR))
}

/// `Σ_α K^α(∞)`.
pub fn k_total_steady(cfg: &SteadyConfig) -> Result<CMatrix> {
    let n = cfg.spec.dim();
    let mut k = CMatrix::zeros(n);
    if !cfg.spec.left.is_coupled() && !cfg.spec.right.is_coupled() {
        return Ok(k);
    }
    let d = steady_decomposition(cfg)?;
    for lead in LeadLabel::BOTH {
        if cfg.spec.lead(lead).is_coupled() {
            let p = p_alpha_from(cfg, &d, lead, cfg.lambda(lead))?;
            k += &p;
            k += &p.adjoint();
        }
    }
    Ok(k)
}

/// Stationary `σ` solving `0 = −i[h_D(∞), σ] − Σ_α (K^α(∞) + {Λ^α, σ})`.
///
/// Written as `Hσ − σH† = iK` with `H = h_D(∞) − iΛ`, the equation is
/// diagonal in the eigenbasis of `H`.
pub fn steady_sigma(cfg: &SteadyConfig) -> Result<CMatrix> {
    let k = k_total_steady(cfg)?;
    let d = steady_decomposition(cfg)?;
    let n = cfg.spec.dim();
    let rhs = (&(&d.inverse * &k) * &d.inverse.adjoint()).scale(Complex64::new(0.0, 1.0));
    let mut y = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let denom = d.eigenvalues[i] - d.eigenvalues[j].conj();
            if denom.norm() < SYLVESTER_GUARD {
                return Err(Error::SingularSylvester {
                    denominator: denom.norm(),
                });
            }
            y[(i, j)] = rhs[(i, j)] / denom;
        }
    }
    let sigma = &(&d.vectors * &y) * &d.vectors.adjoint();
    sigma.ensure_finite("steady density")?;
    Ok(sigma)
}

/// `‖Hσ − σH† − iK‖_F` in eV for `H = h_D(∞) − iΛ`.
pub fn steady_residual(cfg: &SteadyConfig, sigma: &CMatrix) -> Result<f64> {
    let h = open_hamiltonian(&cfg.h_inf, &cfg.spec.lambda_total());
    let k = k_total_steady(cfg)?;
    let lhs = &(&h * sigma) - &(sigma * &h.adjoint());
    Ok((&lhs - &k.scale(Complex64::new(0.0, 1.0))).frobenius_norm())
}

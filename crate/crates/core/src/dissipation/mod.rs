//! Wide-band-limit dissipation functional
//! `Q_α(t) = K^α(t) + {Λ^α, σ_D(t)}` with `K^α = P^α + (P^α)†` and
//! `P^α = P^(−) + P^(+)`.
//!
//! `P^(−)` carries the memory of the initial equilibrium and decays with the
//! line-widths; `P^(+)` builds up the response to the bias. Both reduce to
//! energy integrals over `[ε_min, μ⁰]` that are evaluated eigenvalue by
//! eigenvalue in closed form.

mod history;
mod propagator;
mod resolvent;

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::device::{LeadLabel, LeadSpec, SystemSpec};
use crate::error::{Error, Result};
use crate::matcore::{eig_general, CMatrix, EigDecomposition};
use crate::units::HBAR_EV_FS;

pub use history::{p_plus_exact, HistoryBuffer, HistoryStep};
pub use propagator::{propagator_advance, step_factor, PropagatorState};
pub use resolvent::{fermi_resolvent_integral, fermi_resolvent_scalar, POLE_TOLERANCE};

use resolvent::fermi_resolvent_shifted;

/// `−2i/π`.
pub(crate) const PREFACTOR: Complex64 = Complex64::new(0.0, -2.0 / PI);

/// Hermiticity tolerance applied to `σ_D` on entry to [`q_wbl`].
pub const SIGMA_HERMITICITY_TOL: f64 = 1e-8;
/// Relative Hermiticity tolerance applied to `K^α`.
pub const K_HERMITICITY_TOL: f64 = 1e-10;

/// `h_D(0) − iΛ` where `Λ = Λ^L + Λ^R`.
pub fn open_hamiltonian(h: &CMatrix, lambda_total: &CMatrix) -> CMatrix {
    h - &lambda_total.scale(Complex64::new(0.0, 1.0))
}

/// `P^(−)_α(t) = −(2i/π) e^{iφ_α} U^(−)(t) F(t) Λ^α` where `F(t)` is the
/// Fermi-window resolvent integral of `h_D(0) − iΛ` and `decomp0` its
/// eigendecomposition.
pub fn p_minus(
    state: &PropagatorState,
    decomp0: &EigDecomposition,
    lead: &LeadSpec,
    t: f64,
    spec: &SystemSpec,
) -> Result<CMatrix> {
    check_time(state, t)?;
    if !lead.is_coupled() {
        return Ok(CMatrix::zeros(spec.dim()));
    }
    let f = fermi_resolvent_integral(decomp0, t, spec.mu0, spec.band_bottom)?;
    Ok(p_minus_from(state, &f, &lead.lambda))
}

fn p_minus_from(state: &PropagatorState, f: &CMatrix, lambda_alpha: &CMatrix) -> CMatrix {
    let uf = &state.u_minus * f;
    (&uf.scale(state.phase_factor()) * lambda_alpha).scale(PREFACTOR)
}

/// Adiabatic `P^(+)_α(t)`:
/// `−(2i/π) ∫ [I − U^α(t) e^{iεt/ħ}] (ε − M)⁻¹ dε · Λ^α` with
/// `M = h_D(t) − iΛ − Δε^α(t)`, i.e. the energy integral is done as if the
/// current Hamiltonian and shift had always been in place while the
/// propagator carries the actual history. Exactly zero at `t = 0`.
pub fn p_plus_adiabatic(
    state: &PropagatorState,
    lead: &LeadSpec,
    h_now: &CMatrix,
    t: f64,
    spec: &SystemSpec,
) -> Result<CMatrix> {
    check_time(state, t)?;
    let n = spec.dim();
    if t == 0.0 || !lead.is_coupled() {
        return Ok(CMatrix::zeros(n));
    }
    h_now.ensure_dim(n)?;
    let m = open_hamiltonian(h_now, &spec.lambda_total())
        .shift_diag(Complex64::new(-lead.level_shift(t), 0.0));
    let decomp = eig_general(&m)?;
    let r0 = fermi_resolvent_integral(&decomp, 0.0, spec.mu0, spec.band_bottom)?;
    let rt = fermi_resolvent_integral(&decomp, t, spec.mu0, spec.band_bottom)?;
    Ok(p_plus_from(state, &r0, &rt, &lead.lambda))
}

fn p_plus_from(state: &PropagatorState, r0: &CMatrix, rt: &CMatrix, lambda_alpha: &CMatrix) -> CMatrix {
    (&(r0 - &(&state.u_alpha * rt)) * lambda_alpha).scale(PREFACTOR)
}

fn check_time(state: &PropagatorState, t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument("time must be finite and non-negative"));
    }
    if (state.t - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::InvalidArgument("propagator state is not at the requested time"));
    }
    Ok(())
}

/// `Q_α = K^α + Λ^α σ + σ Λ^α`.
pub fn q_wbl(sigma: &CMatrix, k_alpha: &CMatrix, lambda_alpha: &CMatrix) -> Result<CMatrix> {
    let n = sigma.dim();
    k_alpha.ensure_dim(n)?;
    lambda_alpha.ensure_dim(n)?;
    let sigma_defect = sigma.hermiticity_defect();
    let sigma_tol = SIGMA_HERMITICITY_TOL * sigma.frobenius_norm().max(1.0);
    if sigma_defect > sigma_tol {
        return Err(Error::HermiticityViolation {
            defect: sigma_defect,
            tolerance: sigma_tol,
        });
    }
    let k_defect = k_alpha.hermiticity_defect();
    let k_tol = K_HERMITICITY_TOL * k_alpha.frobenius_norm().max(f64::MIN_POSITIVE);
    if k_defect > k_tol {
        return Err(Error::HermiticityViolation {
            defect: k_defect,
            tolerance: k_tol,
        });
    }
    Ok(k_alpha + &lambda_alpha.anticommutator(sigma))
}

/// All pieces of one lead's dissipation term at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationResult {
    pub lead: LeadLabel,
    pub q_alpha: CMatrix,
    pub k_alpha: CMatrix,
    pub p_minus: CMatrix,
    pub p_plus: CMatrix,
}

impl DissipationResult {
    pub fn assemble(
        lead: LeadLabel,
        sigma: &CMatrix,
        lambda_alpha: &CMatrix,
        p_minus: CMatrix,
        p_plus: CMatrix,
    ) -> Result<Self> {
        let p = &p_minus + &p_plus;
        let k_alpha = &p + &p.adjoint();
        let q_alpha = q_wbl(sigma, &k_alpha, lambda_alpha)?;
        Ok(Self {
            lead,
            q_alpha,
            k_alpha,
            p_minus,
            p_plus,
        })
    }

    pub fn zero(lead: LeadLabel, dim: usize) -> Self {
        Self {
            lead,
            q_alpha: CMatrix::zeros(dim),
            k_alpha: CMatrix::zeros(dim),
            p_minus: CMatrix::zeros(dim),
            p_plus: CMatrix::zeros(dim),
        }
    }

    /// `P^α = P^(−) + P^(+)`.
    pub fn p_alpha(&self) -> CMatrix {
        &self.p_minus + &self.p_plus
    }

    /// `J_α = −tr Q_α / ħ` in electrons per fs; positive when electrons flow
    /// from the lead into the device.
    pub fn current(&self) -> f64 {
        -self.q_alpha.trace().re / HBAR_EV_FS
    }

    /// `‖K − K†‖_F / ‖K‖_F`, zero for a vanishing `K`.
    pub fn k_relative_defect(&self) -> f64 {
        let norm = self.k_alpha.frobenius_norm();
        if norm == 0.0 {
            0.0
        } else {
            self.k_alpha.hermiticity_defect() / norm
        }
    }
}

/// The dissipation functional for one system, with everything that does not
/// change in time precomputed.
#[derive(Debug, Clone)]
pub struct WblFunctional {
    mu0: f64,
    eps_min: f64,
    h0: CMatrix,
    lambda: [CMatrix; 2],
    lambda_total: CMatrix,
    coupled: [bool; 2],
    /// Decomposition of `h_D(0) − iΛ`; absent for a closed system.
    decomp0: Option<EigDecomposition>,
}

impl WblFunctional {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        let lambda = [spec.left.lambda.clone(), spec.right.lambda.clone()];
        let coupled = [spec.left.is_coupled(), spec.right.is_coupled()];
        let lambda_total = spec.lambda_total();
        let decomp0 = if coupled.iter().any(|&c| c) {
            Some(eig_general(&open_hamiltonian(&spec.device.h0, &lambda_total))?)
        } else {
            None
        };
        Ok(Self {
            mu0: spec.mu0,
            eps_min: spec.band_bottom,
            h0: spec.device.h0.clone(),
            lambda,
            lambda_total,
            coupled,
            decomp0,
        })
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn is_closed(&self) -> bool {
        self.decomp0.is_none()
    }

    pub fn decomp0(&self) -> Option<&EigDecomposition> {
        self.decomp0.as_ref()
    }

    pub fn lambda(&self, lead: LeadLabel) -> &CMatrix {
        &self.lambda[lead.index()]
    }

    pub fn lambda_total(&self) -> &CMatrix {
        &self.lambda_total
    }

    /// `exp(−i(h − iΛ)dt/ħ)`.
    pub fn step_factor(&self, h_avg: &CMatrix, dt: f64) -> Result<CMatrix> {
        step_factor(h_avg, &self.lambda_total, dt)
    }

    /// `P^(−)_α(t)` using the stored decomposition.
    pub fn p_minus(&self, state: &PropagatorState, t: f64) -> Result<CMatrix> {
        let lead = state.lead;
        match (&self.decomp0, self.coupled[lead.index()]) {
            (Some(d), true) => {
                check_time(state, t)?;
                let f = fermi_resolvent_integral(d, t, self.mu0, self.eps_min)?;
                Ok(p_minus_from(state, &f, &self.lambda[lead.index()]))
            }
            _ => Ok(CMatrix::zeros(self.dim())),
        }
    }

    /// Adiabatic `P^(+)_α(t)`. When `h_now` differs from `h_D(0)` by a
    /// multiple of the identity, the stored decomposition is shifted instead
    /// of computing a new one.
    pub fn p_plus_adiabatic(
        &self,
        state: &PropagatorState,
        h_now: &CMatrix,
        level_shift: f64,
        t: f64,
    ) -> Result<CMatrix> {
        check_time(state, t)?;
        let lead = state.lead;
        let decomp0 = match (&self.decomp0, self.coupled[lead.index()]) {
            (Some(d), true) if t > 0.0 => d,
            _ => return Ok(CMatrix::zeros(self.dim())),
        };
        let lambda_alpha = &self.lambda[lead.index()];
        let (r0, rt) = match self.scalar_offset(h_now) {
            Some(offset) => {
                let shift = offset - level_shift;
                (
                    fermi_resolvent_shifted(decomp0, shift, 0.0, self.mu0, self.eps_min)?,
                    fermi_resolvent_shifted(decomp0, shift, t, self.mu0, self.eps_min)?,
                )
            }
            None => {
                let m = open_hamiltonian(h_now, &self.lambda_total)
                    .shift_diag(Complex64::new(-level_shift, 0.0));
                let d = eig_general(&m)?;
                (
                    fermi_resolvent_integral(&d, 0.0, self.mu0, self.eps_min)?,
                    fermi_resolvent_integral(&d, t, self.mu0, self.eps_min)?,
                )
            }
        };
        Ok(p_plus_from(state, &r0, &rt, lambda_alpha))
    }

    /// Full dissipation term for one lead.
    pub fn evaluate(
        &self,
        state: &PropagatorState,
        h_now: &CMatrix,
        level_shift: f64,
        sigma: &CMatrix,
        t: f64,
    ) -> Result<DissipationResult> {
        let lead = state.lead;
        if !self.coupled[lead.index()] {
            return Ok(DissipationResult::zero(lead, self.dim()));
        }
        let p_minus = self.p_minus(state, t)?;
        let p_plus = self.p_plus_adiabatic(state, h_now, level_shift, t)?;
        DissipationResult::assemble(lead, sigma, &self.lambda[lead.index()], p_minus, p_plus)
    }

    /// `s` such that `h = h_D(0) + s·I`, if there is one.
    fn scalar_offset(&self, h: &CMatrix) -> Option<f64> {
        let n = self.dim();
        let offset = (h[(0, 0)] - self.h0[(0, 0)]).re;
        let tol = 1e-13 * self.h0.max_abs().max(offset.abs()).max(1.0);
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j {
                    self.h0[(i, j)] + offset
                } else {
                    self.h0[(i, j)]
                };
                if (h[(i, j)] - expect).norm() > tol {
                    return None;
                }
            }
        }
        Some(offset)
    }
}

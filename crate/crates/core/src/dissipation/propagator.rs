use num_complex::Complex64;

use crate::device::LeadLabel;
use crate::error::{Error, Result};
use crate::matcore::{mat_exp, CMatrix};
use crate::units::HBAR_EV_FS;

/// Accumulated lead propagators.
///
/// `u_alpha` is the ordered exponential of `−i(h_D − iΛ − Δε^α)/ħ` and
/// `u_minus` the same without the lead shift, so that
/// `u_alpha = e^{i·phase}·u_minus` with `phase = ∫Δε^α/ħ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorState {
    pub lead: LeadLabel,
    pub u_alpha: CMatrix,
    pub u_minus: CMatrix,
    pub phase: f64,
    pub t: f64,
}

impl PropagatorState {
    pub fn new(lead: LeadLabel, dim: usize) -> Self {
        Self {
            lead,
            u_alpha: CMatrix::identity(dim),
            u_minus: CMatrix::identity(dim),
            phase: 0.0,
            t: 0.0,
        }
    }

    /// `e^{i·phase}`, the scalar factor relating the two propagators.
    pub fn phase_factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase)
    }

    /// Advances by `dt` given the step factor `exp(−i(h − iΛ)dt/ħ)` shared by
    /// both leads and this lead's mean shift over the step.
    pub fn advance_with_step(&self, step_minus: &CMatrix, level_shift_avg: f64, dt: f64) -> Self {
        let dphase = level_shift_avg * dt / HBAR_EV_FS;
        Self {
            lead: self.lead,
            u_alpha: (step_minus * &self.u_alpha).scale(Complex64::from_polar(1.0, dphase)),
            u_minus: step_minus * &self.u_minus,
            phase: self.phase + dphase,
            t: self.t + dt,
        }
    }
}

/// `exp(−i(h − iΛ)·dt/ħ)`.
pub fn step_factor(h_avg: &CMatrix, lambda_total: &CMatrix, dt: f64) -> Result<CMatrix> {
    let generator = (&h_avg.scale(Complex64::new(0.0, -1.0)) - lambda_total).scale_real(dt / HBAR_EV_FS);
    mat_exp(&generator)
}

/// One step of the ordered exponential.
///
/// `h_avg` and `level_shift_avg` are the device Hamiltonian and this lead's
/// level shift averaged over the step; their midpoint values are a valid
/// second-order substitute. The new factor multiplies from the left, so later
/// times stand to the left of earlier ones.
pub fn propagator_advance(
    state: &PropagatorState,
    h_avg: &CMatrix,
    level_shift_avg: f64,
    lambda_total: &CMatrix,
    dt: f64,
) -> Result<PropagatorState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("dt must be positive"));
    }
    h_avg.ensure_dim(state.u_alpha.dim())?;
    lambda_total.ensure_dim(state.u_alpha.dim())?;
    let step = step_factor(h_avg, lambda_total, dt)?;
    Ok(state.advance_with_step(&step, level_shift_avg, dt))
}

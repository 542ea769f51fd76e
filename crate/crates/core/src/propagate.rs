//! Time-domain driver: equilibrium initialization, RK4 integration of
//! `σ̇ = −(i/ħ)[h_D(t), σ] − (1/ħ) Σ_α Q_α(t)`, and current extraction.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::device::{h_d_at, LeadLabel, SystemSpec};
use crate::dissipation::{
    fermi_resolvent_scalar, open_hamiltonian, DissipationResult, HistoryBuffer, PropagatorState,
    WblFunctional,
};
use crate::error::{Error, Result};
use crate::matcore::{eig_general, CMatrix};
use crate::units::HBAR_EV_FS;

/// Largest accepted `‖rhs(0, σ_eq)‖_F·ħ` in eV.
pub const STATIONARITY_TOL: f64 = 1e-6;

/// Occupation-eigenvalue band outside which a step is flagged.
pub const OCCUPATION_BAND: (f64, f64) = (-0.05, 2.05);

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    pub sigma: CMatrix,
    pub t: f64,
}

impl ReducedDensityMatrix {
    pub fn occupation(&self) -> f64 {
        self.sigma.trace().re
    }
}

/// `σ_eq = (2/π) ∫_{ε_min}^{μ⁰} G^r Λ G^a dε` with `Λ = Λ^L + Λ^R`, checked to
/// make the equation of motion stationary.
///
/// With both leads decoupled the zero-broadening limit is returned instead:
/// twice the spectral projector of `h_D(0)` onto levels inside the window.
pub fn equilibrium_density(spec: &SystemSpec) -> Result<ReducedDensityMatrix> {
    let sigma = equilibrium_sigma(spec)?;
    let dynamics = Dynamics::new(spec, sigma.trace().re)?;
    let states = dynamics.initial_states();
    let residual = dynamics.rhs(0.0, &sigma, &states)?.frobenius_norm() * HBAR_EV_FS;
    if !(residual < STATIONARITY_TOL) {
        return Err(Error::StationarityFailure { residual });
    }
    Ok(ReducedDensityMatrix { sigma, t: 0.0 })
}

fn equilibrium_sigma(spec: &SystemSpec) -> Result<CMatrix> {
    spec.validate().into_result()?;
    let lambda = spec.lambda_total();
    let (a, b) = (spec.band_bottom, spec.mu0);
    if lambda.max_abs() == 0.0 {
        let d = eig_general(&spec.device.h0)?;
        return Ok(d.map(|l| {
            let inside = l.re > a && l.re < b;
            let edge = l.re == a || l.re == b;
            Complex64::new(if inside { 2.0 } else if edge { 1.0 } else { 0.0 }, 0.0)
        }));
    }
    density_from_window(&spec.device.h0, &lambda, &lambda, a, b).map(|s| s.scale_real(2.0 / PI))
}

/// `∫_a^b G^r(ε) Γ G^a(ε) dε` for `G^r = (ε − h + iΛ)⁻¹`, evaluated in the
/// eigenbasis of `h − iΛ`.
pub(crate) fn density_from_window(h: &CMatrix, lambda: &CMatrix, gamma: &CMatrix, a: f64, b: f64) -> Result<CMatrix> {
    let d = eig_general(&open_hamiltonian(h, lambda))?;
    let n = h.dim();
    let log_window = |x: Complex64| fermi_resolvent_scalar(x, 0.0, b, a);
    let logs: Vec<Complex64> = d.eigenvalues.iter().map(|&x| log_window(x)).collect::<Result<_>>()?;
    let logs_conj: Vec<Complex64> = d
        .eigenvalues
        .iter()
        .map(|&x| log_window(x.conj()))
        .collect::<Result<_>>()?;
    // C = V⁻¹ Γ V^{−†}
    let c = &(&d.inverse * gamma) * &d.inverse.adjoint();
    let mut y = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let (x, yc) = (d.eigenvalues[i], d.eigenvalues[j].conj());
            let gap = x - yc;
            let scale = x.norm().max(yc.norm()).max(1.0);
            let window = if gap.norm() > 1e-8 * scale {
                (logs[i] - logs_conj[j]) / gap
            } else {
                1.0 / (a - x) - 1.0 / (b - x)
            };
            y[(i, j)] = c[(i, j)] * window;
        }
    }
    let sigma = &(&d.vectors * &y) * &d.vectors.adjoint();
    sigma.ensure_finite("equilibrium density")?;
    Ok(sigma)
}

/// State of a running propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientState {
    pub t: f64,
    pub sigma: CMatrix,
    pub propagators: [PropagatorState; 2],
}

/// Right-hand side of the equation of motion for one system.
#[derive(Debug, Clone)]
pub struct Dynamics<'a> {
    spec: &'a SystemSpec,
    wbl: WblFunctional,
    reference_occupation: f64,
}

/// RHS value plus the per-lead pieces it was built from.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub derivative: CMatrix,
    pub dissipation: [DissipationResult; 2],
}

impl<'a> Dynamics<'a> {
    /// `reference_occupation` is `tr σ_D(0)`, the zero of the charging term.
    pub fn new(spec: &'a SystemSpec, reference_occupation: f64) -> Result<Self> {
        Ok(Self {
            spec,
            wbl: WblFunctional::new(spec)?,
            reference_occupation,
        })
    }

    pub fn spec(&self) -> &SystemSpec {
        self.spec
    }

    pub fn functional(&self) -> &WblFunctional {
        &self.wbl
    }

    pub fn initial_states(&self) -> [PropagatorState; 2] {
        let n = self.spec.dim();
        [
            PropagatorState::new(LeadLabel::Left, n),
            PropagatorState::new(LeadLabel::Right, n),
        ]
    }

    pub fn initial_state(&self, sigma: CMatrix) -> TransientState {
        TransientState {
            t: 0.0,
            sigma,
            propagators: self.initial_states(),
        }
    }

    /// `σ̇` in 1/fs.
    pub fn rhs(&self, t: f64, sigma: &CMatrix, states: &[PropagatorState; 2]) -> Result<CMatrix> {
        Ok(self.evaluate(t, sigma, states)?.derivative)
    }

    pub fn evaluate(&self, t: f64, sigma: &CMatrix, states: &[PropagatorState; 2]) -> Result<Evaluation> {
        let h = h_d_at(self.spec, t, sigma, self.reference_occupation)?;
        let left = self
            .wbl
            .evaluate(&states[0], &h, self.spec.left.level_shift(t), sigma, t)?;
        let right = self
            .wbl
            .evaluate(&states[1], &h, self.spec.right.level_shift(t), sigma, t)?;
        let coherent = h.commutator(sigma).scale(Complex64::new(0.0, -1.0));
        let derivative = (&(&coherent - &left.q_alpha) - &right.q_alpha).scale_real(1.0 / HBAR_EV_FS);
        Ok(Evaluation {
            derivative,
            dissipation: [left, right],
        })
    }

    /// `h_D` and the lead shifts averaged over `[t0, t0 + tau]`.
    ///
    /// The bias part is integrated exactly; the charging part uses
    /// `mean_occupation`, the caller's estimate of the mean `tr σ`.
    pub fn step_average(&self, t0: f64, tau: f64, mean_occupation: f64) -> (CMatrix, [f64; 2]) {
        let spec = self.spec;
        let shifts = [
            spec.left.level_shift_integral(t0, t0 + tau) / tau,
            spec.right.level_shift_integral(t0, t0 + tau) / tau,
        ];
        let charging = if spec.device.charging_strength != 0.0 {
            spec.device.charging_strength * (mean_occupation - self.reference_occupation)
        } else {
            0.0
        };
        let shift = 0.5 * (shifts[0] + shifts[1]) + charging;
        let h = if shift == 0.0 {
            spec.device.h0.clone()
        } else {
            spec.device.h0.shift_diag(Complex64::new(shift, 0.0))
        };
        (h, shifts)
    }

    fn advance_states(
        &self,
        states: &[PropagatorState; 2],
        t0: f64,
        tau: f64,
        mean_occupation: f64,
    ) -> Result<([PropagatorState; 2], CMatrix, [f64; 2])> {
        let (h_avg, shifts) = self.step_average(t0, tau, mean_occupation);
        let step = self.wbl.step_factor(&h_avg, tau)?;
        let advanced = [
            states[0].advance_with_step(&step, shifts[0], tau),
            states[1].advance_with_step(&step, shifts[1], tau),
        ];
        Ok((advanced, h_avg, shifts))
    }
}

/// One classical RK4 step.
///
/// Stage 1 uses the committed propagators. Stages 2 and 3 use propagators
/// advanced over the first half step, and stage 4 over the full step; the
/// full-step propagators are committed with the new density matrix. Every
/// stage recomputes `K^α` at its own time.
pub fn rk4_step(dynamics: &Dynamics<'_>, state: &TransientState, dt: f64) -> Result<TransientState> {
    let k1 = dynamics.evaluate(state.t, &state.sigma, &state.propagators)?;
    Ok(rk4_step_from(dynamics, state, dt, &k1.derivative)?.0)
}

fn rk4_step_from(
    dynamics: &Dynamics<'_>,
    state: &TransientState,
    dt: f64,
    k1: &CMatrix,
) -> Result<(TransientState, HistoryStepData)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("dt must be positive"));
    }
    let (t, sigma) = (state.t, &state.sigma);
    let half = 0.5 * dt;
    let occ0 = sigma.trace().re;

    let s2 = sigma + &k1.scale_real(half);
    let occ2 = s2.trace().re;
    let (half_states, _, _) = dynamics.advance_states(&state.propagators, t, half, 0.5 * (occ0 + occ2))?;
    let k2 = dynamics.rhs(t + half, &s2, &half_states)?;

    let s3 = sigma + &k2.scale_real(half);
    let k3 = dynamics.rhs(t + half, &s3, &half_states)?;

    let s4 = sigma + &k3.scale_real(dt);
    let occ_mid = 0.5 * (occ2 + s3.trace().re);
    let occ_mean = (occ0 + 4.0 * occ_mid + s4.trace().re) / 6.0;
    let (full_states, h_avg, shifts) = dynamics.advance_states(&state.propagators, t, dt, occ_mean)?;
    let k4 = dynamics.rhs(t + dt, &s4, &full_states)?;

    let mut incr = k1.clone();
    incr += &k2.scale_real(2.0);
    incr += &k3.scale_real(2.0);
    incr += &k4;
    let next = sigma + &incr.scale_real(dt / 6.0);
    Ok((
        TransientState {
            t: t + dt,
            sigma: next,
            propagators: full_states,
        },
        HistoryStepData { h_avg, shifts },
    ))
}

struct HistoryStepData {
    h_avg: CMatrix,
    shifts: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientOptions {
    /// Integrator step in fs.
    pub dt: f64,
    /// Final time in fs; rounded to a whole number of steps.
    pub t_end: f64,
    /// Keep `σ_D` at every step.
    pub store_sigma: bool,
    /// Keep the generator history needed by the exact `P^(+)`.
    pub record_history: bool,
    /// Abort once `‖σ − σ†‖_F` exceeds this.
    pub hermiticity_abort: f64,
}

impl Default for TransientOptions {
    fn default() -> Self {
        Self {
            dt: 0.02,
            t_end: 25.0,
            store_sigma: false,
            record_history: false,
            hermiticity_abort: 1e-8,
        }
    }
}

impl TransientOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            ..Self::default()
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(0.0) as usize
    }
}

/// Health indicators collected over a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// `max ‖σ − σ†‖_F`.
    pub max_sigma_hermiticity_defect: f64,
    /// `max ‖K − K†‖_F / ‖K‖_F` over both leads.
    pub max_k_relative_defect: f64,
    /// Recorded steps with an eigenvalue of `σ` outside [`OCCUPATION_BAND`].
    pub occupation_excursions: usize,
    pub min_occupation_eigenvalue: f64,
    pub max_occupation_eigenvalue: f64,
}

/// Time series of one run. Currents are electrons per fs, positive into the
/// device.
#[derive(Debug, Clone)]
pub struct TransientRecord {
    pub times: Vec<f64>,
    pub j_left: Vec<f64>,
    pub j_right: Vec<f64>,
    pub occupation: Vec<f64>,
    pub final_state: TransientState,
    pub final_dissipation: [DissipationResult; 2],
    /// `σ_D` at every recorded time when requested.
    pub sigmas: Option<Vec<CMatrix>>,
    pub history: Option<HistoryBuffer>,
    pub diagnostics: Diagnostics,
}

impl TransientRecord {
    pub fn final_sigma(&self) -> &CMatrix {
        &self.final_state.sigma
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn current(&self, lead: LeadLabel) -> &[f64] {
        match lead {
            LeadLabel::Left => &self.j_left,
            LeadLabel::Right => &self.j_right,
        }
    }
}

/// Propagates from the equilibrium density to `options.t_end`.
pub fn run_transient(spec: &SystemSpec, options: &TransientOptions) -> Result<TransientRecord> {
    let eq = equilibrium_density(spec)?;
    run_transient_from(spec, eq.sigma, options)
}

/// Propagates from an arbitrary Hermitian initial density.
pub fn run_transient_from(spec: &SystemSpec, sigma0: CMatrix, options: &TransientOptions) -> Result<TransientRecord> {
    spec.validate().into_result()?;
    sigma0.ensure_dim(spec.dim())?;
    if !(options.dt > 0.0 && options.dt.is_finite()) {
        return Err(Error::InvalidArgument("dt must be positive"));
    }
    if !(options.t_end >= 0.0 && options.t_end.is_finite()) {
        return Err(Error::InvalidArgument("t_end must be non-negative"));
    }
    let dynamics = Dynamics::new(spec, sigma0.trace().re)?;
    let dt = options.dt;
    let n_steps = options.n_steps();

    let mut record = Recorder::new(n_steps, options);
    let mut history = if options.record_history {
        Some(HistoryBuffer::new(dt)?)
    } else {
        None
    };
    let mut state = dynamics.initial_state(sigma0);
    let mut eval = dynamics.evaluate(0.0, &state.sigma, &state.propagators)?;
    record.push(&state, &eval)?;
    for k in 1..=n_steps {
        let (mut next, step) = rk4_step_from(&dynamics, &state, dt, &eval.derivative)?;
        // keep the grid exact instead of accumulating dt
        let t = k as f64 * dt;
        next.t = t;
        for p in &mut next.propagators {
            p.t = t;
        }
        if let Some(h) = history.as_mut() {
            h.push(step.h_avg, step.shifts);
        }
        state = next;
        guard(&state, options)?;
        eval = dynamics.evaluate(state.t, &state.sigma, &state.propagators)?;
        record.push(&state, &eval)?;
    }
    Ok(record.finish(state, eval, history))
}

fn guard(state: &TransientState, options: &TransientOptions) -> Result<()> {
    if !state.sigma.is_finite() {
        return Err(Error::Divergence {
            t: state.t,
            reason: "non-finite density matrix",
        });
    }
    if state.sigma.hermiticity_defect() > options.hermiticity_abort {
        return Err(Error::Divergence {
            t: state.t,
            reason: "hermiticity drift",
        });
    }
    Ok(())
}

struct Recorder {
    times: Vec<f64>,
    j_left: Vec<f64>,
    j_right: Vec<f64>,
    occupation: Vec<f64>,
    sigmas: Option<Vec<CMatrix>>,
    diagnostics: Diagnostics,
}

impl Recorder {
    fn new(n_steps: usize, options: &TransientOptions) -> Self {
        let cap = n_steps + 1;
        Self {
            times: Vec::with_capacity(cap),
            j_left: Vec::with_capacity(cap),
            j_right: Vec::with_capacity(cap),
            occupation: Vec::with_capacity(cap),
            sigmas: options.store_sigma.then(|| Vec::with_capacity(cap)),
            diagnostics: Diagnostics {
                min_occupation_eigenvalue: f64::INFINITY,
                max_occupation_eigenvalue: f64::NEG_INFINITY,
                ..Diagnostics::default()
            },
        }
    }

    fn push(&mut self, state: &TransientState, eval: &Evaluation) -> Result<()> {
        let [left, right] = &eval.dissipation;
        let (jl, jr) = (left.current(), right.current());
        if !(jl.is_finite() && jr.is_finite()) {
            return Err(Error::Divergence {
                t: state.t,
                reason: "non-finite current",
            });
        }
        self.times.push(state.t);
        self.j_left.push(jl);
        self.j_right.push(jr);
        self.occupation.push(state.sigma.trace().re);
        if let Some(s) = self.sigmas.as_mut() {
            s.push(state.sigma.clone());
        }
        let d = &mut self.diagnostics;
        d.max_sigma_hermiticity_defect = d
            .max_sigma_hermiticity_defect
            .max(state.sigma.hermiticity_defect());
        d.max_k_relative_defect = d
            .max_k_relative_defect
            .max(left.k_relative_defect())
            .max(right.k_relative_defect());
        if let Ok(e) = eig_general(&state.sigma.hermitian_part()) {
            let (lo, hi) = e
                .eigenvalues
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| {
                    (lo.min(z.re), hi.max(z.re))
                });
            d.min_occupation_eigenvalue = d.min_occupation_eigenvalue.min(lo);
            d.max_occupation_eigenvalue = d.max_occupation_eigenvalue.max(hi);
            if lo < OCCUPATION_BAND.0 || hi > OCCUPATION_BAND.1 {
                d.occupation_excursions += 1;
            }
        }
        Ok(())
    }

    fn finish(self, state: TransientState, eval: Evaluation, history: Option<HistoryBuffer>) -> TransientRecord {
        TransientRecord {
            times: self.times,
            j_left: self.j_left,
            j_right: self.j_right,
            occupation: self.occupation,
            final_state: state,
            final_dissipation: eval.dissipation,
            sigmas: self.sigmas,
            history,
            diagnostics: self.diagnostics,
        }
    }
}

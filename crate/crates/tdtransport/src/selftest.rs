//! Invariant checks run on the configured system.

use std::fmt;

use tdtransport_core::dissipation::p_plus_exact;
use tdtransport_core::matcore::mat_exp;
use tdtransport_core::propagate::{equilibrium_density, run_transient, run_transient_from, Dynamics};
use tdtransport_core::units::{HBAR_EV_FS, NA_PER_ELECTRON_PER_FS};
use tdtransport_core::{
    CMatrix, Complex64, HistoryBuffer, LeadLabel, PropagatorState, SystemSpec, TransientOptions, WblFunctional,
};

use crate::config::RunConfig;
use crate::error::CliError;

const HERMITICITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;
const UNITARY_TOL: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-6;
const ZERO_CURRENT_TOL_NA: f64 = 1e-8;

type CheckFn = fn(&SystemSpec, &TransientOptions) -> tdtransport_core::Result<(bool, String)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

/// Runs every check. Numerical errors inside a check are reported as a
/// failed check rather than aborting the suite.
pub fn run_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let spec = cfg.system_spec()?;
    let options = cfg.transient_options();
    let suite: [(&'static str, CheckFn); 4] = [
        ("P+ vanishes at t = 0", p_plus_at_zero),
        ("hermiticity", hermiticity),
        ("closed-system conservation", closed_system),
        ("equilibrium stationarity", equilibrium),
    ];
    Ok(suite
        .into_iter()
        .map(|(name, check)| match check(&spec, &options) {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check {
                name,
                passed: false,
                detail: e.to_string(),
            },
        })
        .collect())
}

fn p_plus_at_zero(spec: &SystemSpec, options: &TransientOptions) -> tdtransport_core::Result<(bool, String)> {
    let wbl = WblFunctional::new(spec)?;
    let history = HistoryBuffer::new(options.dt)?;
    let mut worst = 0.0f64;
    for lead in LeadLabel::BOTH {
        let state = PropagatorState::new(lead, spec.dim());
        let adiabatic = wbl.p_plus_adiabatic(&state, &spec.device.h0, 0.0, 0.0)?;
        let exact = p_plus_exact(&history, spec.lead(lead), 0.0, spec)?;
        worst = worst.max(adiabatic.max_abs()).max(exact.max_abs());
    }
    Ok((worst == 0.0, format!("max |P+(0)| = {worst:e}")))
}

fn hermiticity(spec: &SystemSpec, options: &TransientOptions) -> tdtransport_core::Result<(bool, String)> {
    let d = run_transient(spec, options)?.diagnostics;
    let (sigma, k) = (d.max_sigma_hermiticity_defect, d.max_k_relative_defect);
    Ok((
        sigma < HERMITICITY_TOL && k < HERMITICITY_TOL,
        format!("max ||sigma - sigma^†|| = {sigma:.2e}; max ||K - K^†||/||K|| = {k:.2e}"),
    ))
}

/// Decouples both leads and propagates the coupled equilibrium density.
fn closed_system(spec: &SystemSpec, options: &TransientOptions) -> tdtransport_core::Result<(bool, String)> {
    let sigma0 = equilibrium_density(spec)?.sigma;
    let mut closed = spec.clone();
    for lead in LeadLabel::BOTH {
        closed.lead_mut(lead).lambda = CMatrix::zeros(spec.dim());
    }
    let options = TransientOptions {
        store_sigma: true,
        ..*options
    };
    let record = run_transient_from(&closed, sigma0.clone(), &options)?;
    let tr0 = sigma0.trace().re;
    let drift = record.occupation.iter().fold(0.0f64, |m, o| m.max((o - tr0).abs()));
    let h = &spec.device.h0;
    let mut unitary = 0.0f64;
    for (&t, sigma) in record.times.iter().zip(record.sigmas.iter().flatten()) {
        let u = mat_exp(&h.scale(Complex64::new(0.0, -t / HBAR_EV_FS)))?;
        let exact = &(&u * &sigma0) * &u.adjoint();
        unitary = unitary.max((sigma - &exact).frobenius_norm());
    }
    Ok((
        drift < TRACE_TOL && unitary < UNITARY_TOL,
        format!("max |tr sigma - tr sigma0| = {drift:.2e}; max ||sigma - U sigma0 U^†|| = {unitary:.2e}"),
    ))
}

/// Removes the bias and checks that equilibrium does not move.
fn equilibrium(spec: &SystemSpec, options: &TransientOptions) -> tdtransport_core::Result<(bool, String)> {
    let mut unbiased = spec.clone();
    for lead in LeadLabel::BOTH {
        unbiased.lead_mut(lead).bias_amplitude = 0.0;
    }
    let sigma = equilibrium_density(&unbiased)?.sigma;
    let dynamics = Dynamics::new(&unbiased, sigma.trace().re)?;
    let residual = dynamics.rhs(0.0, &sigma, &dynamics.initial_states())?.frobenius_norm() * HBAR_EV_FS;
    let record = run_transient(&unbiased, options)?;
    let current = record
        .j_left
        .iter()
        .chain(&record.j_right)
        .fold(0.0f64, |m, j| m.max(j.abs()))
        * NA_PER_ELECTRON_PER_FS;
    Ok((
        residual < RESIDUAL_TOL && current < ZERO_CURRENT_TOL_NA,
        format!("||rhs(0, sigma_eq)|| = {residual:.2e} eV/hbar; max |J| = {current:.2e} nA"),
    ))
}

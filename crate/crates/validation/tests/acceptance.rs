//! End-to-end acceptance checks on the single-site junction and on small
//! random systems. Prints one PASS/FAIL line per check and exits nonzero if
//! any check fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdtransport_core::dissipation::{fermi_resolvent_scalar, p_plus_exact};
use tdtransport_core::matcore::mat_exp;
use tdtransport_core::propagate::{equilibrium_density, run_transient, run_transient_from, Dynamics};
use tdtransport_core::steady::{landauer_current, p_alpha_steady};
use tdtransport_core::units::{HBAR_EV_FS, NA_PER_ELECTRON_PER_FS};
use tdtransport_core::{
    CMatrix, Complex64, DeviceSpec, HistoryBuffer, LeadLabel, LeadSpec, PropagatorState, SteadyConfig, SystemSpec,
    TransientOptions, TransientRecord, WblFunctional,
};

const DT: f64 = 0.02;
const T_END: f64 = 25.0;
const TURN_ON: f64 = 0.2;
const BAND_BOTTOM: f64 = -200.0;

/// Single site at `μ⁰ = h_D(0) = 0`, `Λ^L = Λ^R = lambda`, left lead unbiased,
/// right lead shifted by `shift` with turn-on time `a`.
fn junction(shift: f64, lambda: f64, a: f64, band_bottom: f64) -> SystemSpec {
    let lead = |label, shift| LeadSpec::with_level_shift(label, CMatrix::from_diag_real(&[lambda]), shift, a);
    SystemSpec {
        device: DeviceSpec::new(CMatrix::zeros(1)),
        left: lead(LeadLabel::Left, 0.0),
        right: lead(LeadLabel::Right, shift),
        mu0: 0.0,
        band_bottom,
    }
}

/// Time after which `e^{−Λt/ħ} < 1e-6` for total line-width `lambda_total`,
/// rounded up to whole femtoseconds and never shorter than the default run.
fn settling_horizon(lambda_total: f64) -> f64 {
    (1e6f64.ln() * HBAR_EV_FS / lambda_total).ceil().max(T_END)
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

/// Runs transients and keeps the worst Hermiticity defects seen in any of
/// them.
#[derive(Default)]
struct Runner {
    max_sigma_defect: f64,
    max_k_defect: f64,
    runs: usize,
}

impl Runner {
    fn track(&mut self, rec: TransientRecord) -> TransientRecord {
        self.max_sigma_defect = self.max_sigma_defect.max(rec.diagnostics.max_sigma_hermiticity_defect);
        self.max_k_defect = self.max_k_defect.max(rec.diagnostics.max_k_relative_defect);
        self.runs += 1;
        rec
    }

    fn run(&mut self, spec: &SystemSpec, options: &TransientOptions) -> TransientRecord {
        self.track(run_transient(spec, options).expect("transient run"))
    }

    fn run_from(&mut self, spec: &SystemSpec, sigma0: CMatrix, options: &TransientOptions) -> TransientRecord {
        self.track(run_transient_from(spec, sigma0, options).expect("transient run"))
    }
}

fn landauer_right(spec: &SystemSpec) -> f64 {
    landauer_current(&SteadyConfig::settled(spec).expect("steady config"))
        .expect("landauer current")
        .right
}

fn last(v: &[f64]) -> f64 {
    *v.last().expect("non-empty record")
}

/// Indices of interior local extrema.
fn extrema(j: &[f64]) -> Vec<usize> {
    (1..j.len() - 1)
        .filter(|&k| (j[k] - j[k - 1]) * (j[k + 1] - j[k]) < 0.0)
        .collect()
}

fn transient_benchmark(runner: &mut Runner) -> Outcome {
    let spec = junction(2.0, 0.1, TURN_ON, BAND_BOTTOM);
    let clock = Instant::now();
    let rec = runner.run(&spec, &TransientOptions::new(DT, T_END));
    let runtime = clock.elapsed().as_secs_f64();
    let j = &rec.j_right;

    let ext = extrema(j);
    let first = ext.first().copied().unwrap_or(j.len() - 1);
    let rise = j[..=first].windows(2).all(|w| w[1] >= w[0]) && j[first] > j[0];
    let spacings: Vec<f64> = ext.windows(2).map(|w| rec.times[w[1]] - rec.times[w[0]]).collect();
    let spacing = spacings.iter().sum::<f64>() / spacings.len().max(1) as f64;
    let period = 2.0 * PI * HBAR_EV_FS / 2.0;
    let period_ok = !spacings.is_empty() && ((spacing - period) / period).abs() < 0.1;

    let landauer = landauer_right(&spec);
    let plateau = last(j);
    let plateau_err = ((plateau - landauer) / landauer).abs();
    Outcome::new(
        rise && period_ok && plateau_err < 0.01 && runtime < 60.0,
        format!(
            "rise to first maximum at {:.2} fs: {rise}; mean extremum spacing {spacing:.4} fs over {} extrema \
             (expected {period:.4}); plateau {:.6} nA vs Landauer {:.6} nA (rel {plateau_err:.2e}); runtime {runtime:.2} s",
            rec.times[first],
            ext.len(),
            plateau * NA_PER_ELECTRON_PER_FS,
            landauer * NA_PER_ELECTRON_PER_FS,
        ),
    )
}

/// Long runs of the four single-site configurations, keyed by
/// `(Δε^R, Λ^α)`.
struct LongRuns {
    configs: Vec<(f64, f64, SystemSpec, TransientRecord)>,
}

impl LongRuns {
    fn new(runner: &mut Runner) -> Self {
        let configs = [(2.0, 0.1), (0.2, 0.1), (10.0, 0.1), (2.0, 0.04)]
            .into_iter()
            .map(|(shift, lambda)| {
                let spec = junction(shift, lambda, TURN_ON, BAND_BOTTOM);
                let rec = runner.run(&spec, &TransientOptions::new(DT, settling_horizon(2.0 * lambda)));
                (shift, lambda, spec, rec)
            })
            .collect();
        Self { configs }
    }

    fn get(&self, shift: f64, lambda: f64) -> &(f64, f64, SystemSpec, TransientRecord) {
        self.configs
            .iter()
            .find(|c| c.0 == shift && c.1 == lambda)
            .expect("configuration was run")
    }
}

fn overshoot(rec: &TransientRecord) -> f64 {
    let plateau = last(&rec.j_right);
    let peak = rec.j_right.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (peak - plateau) / plateau.abs()
}

fn fluctuation_monotonicity(long: &LongRuns) -> Outcome {
    let ratios: Vec<f64> = [0.2, 2.0, 10.0].iter().map(|&s| overshoot(&long.get(s, 0.1).3)).collect();
    Outcome::new(
        ratios.windows(2).all(|w| w[1] > w[0]),
        format!(
            "overshoot (peak - plateau)/plateau at shift 0.2/2/10 eV: {:.4} / {:.4} / {:.4}",
            ratios[0], ratios[1], ratios[2]
        ),
    )
}

/// First time after which `J_R` stays within 2% of its final value.
fn settling_time(rec: &TransientRecord) -> f64 {
    let plateau = last(&rec.j_right);
    let outside = rec
        .j_right
        .iter()
        .rposition(|j| (j - plateau).abs() > 0.02 * plateau.abs());
    outside.map_or(0.0, |k| rec.times[k + 1])
}

fn damping_monotonicity(long: &LongRuns) -> Outcome {
    let fast = settling_time(&long.get(2.0, 0.1).3);
    let slow = settling_time(&long.get(2.0, 0.04).3);
    Outcome::new(
        fast < slow,
        format!("settling time to 2%: {fast:.2} fs at 0.1 eV, {slow:.2} fs at 0.04 eV"),
    )
}

fn equilibrium_stationarity(runner: &mut Runner) -> Outcome {
    let spec = junction(0.0, 0.1, TURN_ON, BAND_BOTTOM);
    let sigma = equilibrium_density(&spec).expect("equilibrium").sigma;
    let dynamics = Dynamics::new(&spec, sigma.trace().re).expect("dynamics");
    let residual = dynamics
        .rhs(0.0, &sigma, &dynamics.initial_states())
        .expect("rhs")
        .frobenius_norm()
        * HBAR_EV_FS;
    let rec = runner.run(&spec, &TransientOptions::new(DT, T_END));
    let max_current = rec
        .j_left
        .iter()
        .chain(&rec.j_right)
        .fold(0.0f64, |m, j| m.max(j.abs()))
        * NA_PER_ELECTRON_PER_FS;
    Outcome::new(
        residual < 1e-6 && max_current < 1e-8,
        format!("||rhs(0, sigma_eq)|| = {residual:.2e} eV/hbar; max |J| over 25 fs = {max_current:.2e} nA"),
    )
}

fn closed_system(runner: &mut Runner) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut random_hermitian = |n: usize, scale: f64| {
        CMatrix::from_fn(n, |_, _| {
            Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
        })
        .hermitian_part()
    };
    let h = random_hermitian(4, 0.25);
    let sigma0 = random_hermitian(4, 1.0);
    let spec = SystemSpec {
        device: DeviceSpec::new(h.clone()),
        left: LeadSpec::new(LeadLabel::Left, CMatrix::zeros(4), 0.0, TURN_ON),
        right: LeadSpec::new(LeadLabel::Right, CMatrix::zeros(4), 0.0, TURN_ON),
        mu0: 0.0,
        band_bottom: BAND_BOTTOM,
    };
    let options = TransientOptions {
        store_sigma: true,
        ..TransientOptions::new(DT, T_END)
    };
    let rec = runner.run_from(&spec, sigma0.clone(), &options);
    let tr0 = sigma0.trace().re;
    let trace_drift = rec.occupation.iter().fold(0.0f64, |m, o| m.max((o - tr0).abs()));
    let sigmas = rec.sigmas.as_ref().expect("stored densities");
    let unitary_err = rec.times.iter().zip(sigmas).fold(0.0f64, |m, (&t, s)| {
        let u = mat_exp(&h.scale(Complex64::new(0.0, -t / HBAR_EV_FS))).expect("exponential");
        let exact = &(&u * &sigma0) * &u.adjoint();
        m.max((s - &exact).frobenius_norm())
    });
    Outcome::new(
        trace_drift < 1e-8 && unitary_err < 1e-6,
        format!("max |tr sigma - tr sigma0| = {trace_drift:.2e}; max ||sigma - U sigma0 U^†|| = {unitary_err:.2e}"),
    )
}

fn relative(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).frobenius_norm() / b.frobenius_norm()
}

fn p_plus_identities(runner: &mut Runner) -> Outcome {
    let a = 0.01;
    let spec = junction(2.0, 0.1, a, BAND_BOTTOM);

    // vanishing at t = 0
    let wbl = WblFunctional::new(&spec).expect("functional");
    let empty = HistoryBuffer::new(DT).expect("history");
    let mut at_zero = 0.0f64;
    for lead in LeadLabel::BOTH {
        let state = PropagatorState::new(lead, 1);
        let adiabatic = wbl
            .p_plus_adiabatic(&state, &spec.device.h0, spec.lead(lead).level_shift(0.0), 0.0)
            .expect("adiabatic");
        let exact = p_plus_exact(&empty, spec.lead(lead), 0.0, &spec).expect("exact");
        at_zero = at_zero.max(adiabatic.max_abs()).max(exact.max_abs());
    }

    // adiabatic vs exact for a step-like bias
    let options = TransientOptions {
        record_history: true,
        ..TransientOptions::new(DT, 10.0)
    };
    let rec = runner.run(&spec, &options);
    let history = rec.history.as_ref().expect("history");
    let mut step_err = 0.0f64;
    for d in &rec.final_dissipation {
        let exact = p_plus_exact(history, spec.lead(d.lead), 10.0, &spec).expect("exact");
        step_err = step_err.max(relative(&d.p_plus, &exact));
    }

    // constant coefficients against the closed form
    let t = 5.0;
    let (h, shift) = (1.0, 2.0);
    let lambda = 0.1;
    let constant = HistoryBuffer::constant(DT, (t / DT).round() as usize, &CMatrix::from_diag_real(&[h]), [0.0, shift])
        .expect("history");
    let exact = p_plus_exact(&constant, &spec.right, t, &spec).expect("exact")[(0, 0)];
    let m = Complex64::new(h - shift, -2.0 * lambda);
    let r0 = fermi_resolvent_scalar(m, 0.0, spec.mu0, spec.band_bottom).expect("resolvent");
    let rt = fermi_resolvent_scalar(m, t, spec.mu0, spec.band_bottom).expect("resolvent");
    let decay = (Complex64::new(0.0, -t / HBAR_EV_FS) * m).exp();
    let closed = Complex64::new(0.0, -2.0 / PI) * (r0 - decay * rt) * lambda;
    let closed_err = (exact - closed).norm() / closed.norm();

    Outcome::new(
        at_zero == 0.0 && step_err < 1e-3 && closed_err < 1e-6,
        format!(
            "max |P+(0)| = {at_zero:e}; adiabatic vs exact at 10 fs (a = 0.01 fs): rel {step_err:.2e}; \
             constant coefficients vs closed form: rel {closed_err:.2e}"
        ),
    )
}

fn long_time_limit(long: &LongRuns) -> Outcome {
    let (_, _, spec, rec) = long.get(2.0, 0.1);
    let cfg = SteadyConfig::settled(spec).expect("steady config");
    let mut worst = 0.0f64;
    for d in &rec.final_dissipation {
        let steady = p_alpha_steady(&cfg, d.lead).expect("steady P");
        worst = worst.max(relative(&d.p_alpha(), &steady));
    }
    let t = rec.final_state.t;
    let decay = (-0.2 * t / HBAR_EV_FS).exp();
    Outcome::new(
        worst < 1e-4 && decay < 1e-6,
        format!("t = {t:.1} fs (exp(-lambda t/hbar) = {decay:.1e}): max rel ||P(t) - P(inf)|| = {worst:.2e}"),
    )
}

fn current_conservation(long: &LongRuns) -> Outcome {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (shift, lambda, _, rec) in &long.configs {
        let (jl, jr) = (last(&rec.j_left), last(&rec.j_right));
        let defect = (jl + jr).abs() / jl.abs().max(jr.abs());
        worst = worst.max(defect);
        parts.push(format!("({shift}, {lambda}) {defect:.1e} at {:.0} fs", rec.final_state.t));
    }
    Outcome::new(worst < 1e-3, format!("|J_L + J_R|/max|J| for (shift, lambda): {}", parts.join("; ")))
}

fn hermiticity(runner: &Runner) -> Outcome {
    Outcome::new(
        runner.max_sigma_defect < 1e-10 && runner.max_k_defect < 1e-10,
        format!(
            "over {} runs: max ||sigma - sigma^†|| = {:.2e}; max ||K - K^†||/||K|| = {:.2e}",
            runner.runs, runner.max_sigma_defect, runner.max_k_defect
        ),
    )
}

fn cutoff_robustness(runner: &mut Runner, long: &LongRuns) -> Outcome {
    let shallow = last(&long.get(2.0, 0.1).3.j_right);
    let spec = junction(2.0, 0.1, TURN_ON, 2.0 * BAND_BOTTOM);
    let deep = last(&runner.run(&spec, &TransientOptions::new(DT, settling_horizon(0.2))).j_right);
    let change = ((deep - shallow) / shallow).abs();
    Outcome::new(
        change < 5e-3,
        format!("steady J_R at band bottom -200 / -400 eV: {shallow:.10} / {deep:.10} e/fs (rel change {change:.2e})"),
    )
}

fn rk4_order(runner: &mut Runner) -> Outcome {
    let spec = junction(2.0, 0.1, TURN_ON, BAND_BOTTOM);
    let reference_dt = 0.0025;
    let reference = runner.run(&spec, &TransientOptions::new(reference_dt, T_END));
    let steps = [0.04, 0.02, 0.01];
    let errors: Vec<f64> = steps
        .iter()
        .map(|&dt| {
            let rec = runner.run(&spec, &TransientOptions::new(dt, T_END));
            let stride = (dt / reference_dt).round() as usize;
            rec.j_right
                .iter()
                .enumerate()
                .map(|(k, j)| (j - reference.j_right[k * stride]).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    // least-squares slope of log(error) against log(dt)
    let xs: Vec<f64> = steps.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let pairwise: Vec<String> = errors.windows(2).map(|w| format!("{:.2}", (w[0] / w[1]).log2())).collect();
    Outcome::new(
        (3.5..=4.5).contains(&slope),
        format!(
            "max |J_R - J_R(ref)| at dt 0.04/0.02/0.01 fs: {:.2e} / {:.2e} / {:.2e} e/fs; \
             fitted order {slope:.2} (pairwise {})",
            errors[0],
            errors[1],
            errors[2],
            pairwise.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let mut runner = Runner::default();
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    results.push(("transient benchmark", transient_benchmark(&mut runner)));
    let long = LongRuns::new(&mut runner);
    results.push(("fluctuation grows with level shift", fluctuation_monotonicity(&long)));
    results.push(("damping grows with line-width", damping_monotonicity(&long)));
    results.push(("equilibrium stationarity", equilibrium_stationarity(&mut runner)));
    results.push(("closed-system limit", closed_system(&mut runner)));
    results.push(("P+ identities", p_plus_identities(&mut runner)));
    results.push(("long-time limit of P", long_time_limit(&long)));
    results.push(("steady current conservation", current_conservation(&long)));
    let cutoff = cutoff_robustness(&mut runner, &long);
    let order = rk4_order(&mut runner);
    results.push(("hermiticity", hermiticity(&runner)));
    results.push(("cutoff robustness", cutoff));
    results.push(("RK4 convergence order", order));

    let mut failed = 0;
    for (k, (name, outcome)) in results.iter().enumerate() {
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!outcome.passed);
        println!("{status} {:>2} {name}: {}", k + 1, outcome.detail);
    }
    println!("{}/{} checks passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

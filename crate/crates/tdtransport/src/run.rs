//! Mode dispatch and CSV output.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use tdtransport_core::propagate::run_transient;
use tdtransport_core::steady::{landauer_current, steady_residual, steady_sigma, transmission_curve};
use tdtransport_core::units::CurrentUnit;
use tdtransport_core::SteadyConfig;

use crate::config::{Mode, RunConfig};
use crate::error::CliError;
use crate::selftest;

pub const TRANSIENT_HEADER: [&str; 4] = ["t_fs", "J_L", "J_R", "occupation"];
pub const STEADY_HEADER: [&str; 5] = ["J_steady", "J_L", "J_R", "occupation", "residual"];
pub const TRANSMISSION_HEADER: [&str; 2] = ["eps_eV", "T"];

fn number(x: f64) -> String {
    // adding zero maps -0.0 to 0.0
    format!("{:.15e}", x + 0.0)
}

fn writer(cfg: &RunConfig) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match &cfg.output.path {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|source| CliError::Io {
            context: format!("creating {}", path.display()),
            source,
        })?)),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn write_rows<const N: usize>(
    cfg: &RunConfig,
    header: [&str; N],
    rows: impl IntoIterator<Item = [f64; N]>,
) -> Result<(), CliError> {
    let mut out = writer(cfg)?;
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.map(number))?;
    }
    out.flush().map_err(|source| CliError::Io {
        context: "writing CSV".into(),
        source,
    })
}

/// Runs the configured mode. Non-selftest modes write CSV to the configured
/// path or to standard output.
pub fn run(cfg: &RunConfig, mode: Mode) -> Result<(), CliError> {
    match mode {
        Mode::Transient => transient(cfg),
        Mode::Steady => steady(cfg),
        Mode::Transmission => transmission(cfg),
        Mode::Selftest => {
            let checks = selftest::run_checks(cfg)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for check in &checks {
                println!("{check}");
            }
            if failed > 0 {
                return Err(CliError::SelftestFailed { failed });
            }
            Ok(())
        }
    }
}

fn transient(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.system_spec()?;
    let record = run_transient(&spec, &cfg.transient_options())?;
    let scale = CurrentUnit::from(cfg.output.unit).per_electron_per_fs();
    let stride = cfg.output.stride;
    let last = record.len() - 1;
    let d = &record.diagnostics;
    eprintln!(
        "transient: {} steps to {} fs; max hermiticity defect {:.2e}; currents in {}",
        last,
        record.times[last],
        d.max_sigma_hermiticity_defect,
        CurrentUnit::from(cfg.output.unit).symbol()
    );
    if d.occupation_excursions > 0 {
        eprintln!(
            "warning: occupation eigenvalues left [0, 2] at {} steps (range {:.3e} to {:.3e})",
            d.occupation_excursions, d.min_occupation_eigenvalue, d.max_occupation_eigenvalue
        );
    }
    let rows = (0..=last).filter(|&k| k % stride == 0 || k == last).map(|k| {
        [
            record.times[k],
            record.j_left[k] * scale,
            record.j_right[k] * scale,
            record.occupation[k],
        ]
    });
    write_rows(cfg, TRANSIENT_HEADER, rows)
}

fn steady(cfg: &RunConfig) -> Result<(), CliError> {
    let steady = SteadyConfig::settled_with(&cfg.system_spec()?, cfg.quadrature())?;
    let currents = landauer_current(&steady)?;
    let sigma = steady_sigma(&steady)?;
    let residual = steady_residual(&steady, &sigma)?;
    let scale = CurrentUnit::from(cfg.output.unit).per_electron_per_fs();
    let row = [
        currents.right * scale,
        currents.left * scale,
        currents.right * scale,
        sigma.trace().re,
        residual,
    ];
    write_rows(cfg, STEADY_HEADER, [row])
}

fn transmission(cfg: &RunConfig) -> Result<(), CliError> {
    let steady = SteadyConfig::settled_with(&cfg.system_spec()?, cfg.quadrature())?;
    let (from, to) = cfg.grid_range();
    let curve = transmission_curve(&steady, from, to, cfg.transmission.points)?;
    write_rows(cfg, TRANSMISSION_HEADER, curve.into_iter().map(|(e, t)| [e, t]))
}

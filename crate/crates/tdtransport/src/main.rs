use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use tdtransport::error::EXIT_VALIDATION;
use tdtransport::{load_config, run, CliError, Mode, RunConfig, Unit};

/// Shipped single-site junction, used by `selftest` when no config is given.
const BENCHMARK: &str = include_str!("../configs/benchmark.json");

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Transient,
    Steady,
    Transmission,
    Selftest,
}

impl From<ModeArg> for Mode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Transient => Mode::Transient,
            ModeArg::Steady => Mode::Steady,
            ModeArg::Transmission => Mode::Transmission,
            ModeArg::Selftest => Mode::Selftest,
        }
    }
}

/// Wide-band-limit transient and steady-state transport through a device
/// coupled to two leads.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    mode: ModeArg,
    /// JSON run configuration (optional for selftest).
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path; overrides the configuration, defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Current unit: nA or uA.
    #[arg(long)]
    unit: Option<Unit>,
    /// Write every N-th transient step.
    #[arg(long)]
    stride: Option<usize>,
}

fn configure(args: &Args) -> Result<(RunConfig, Mode), CliError> {
    let mode = Mode::from(args.mode);
    let mut cfg = match (&args.config, mode) {
        (Some(path), _) => load_config(path)?,
        (None, Mode::Selftest) => RunConfig::from_json(BENCHMARK)?,
        (None, _) => return Err(CliError::Validation(format!("{mode} requires --config"))),
    };
    if let Some(file_mode) = cfg.mode.filter(|&m| m != mode) {
        eprintln!("note: configuration requests {file_mode}, running {mode}");
    }
    cfg.mode = Some(mode);
    if let Some(out) = &args.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(unit) = args.unit {
        cfg.output.unit = unit;
    }
    if let Some(stride) = args.stride {
        cfg.output.stride = stride;
    }
    cfg.validate()?;
    Ok((cfg, mode))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_VALIDATION);
        }
        Err(e) => e.exit(),
    };
    match configure(&args).and_then(|(cfg, mode)| run(&cfg, mode)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

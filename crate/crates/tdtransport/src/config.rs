//! JSON run configuration.
//!
//! Complex matrices are written as nested arrays of `[re, im]` pairs, one
//! inner array per row. Optional numerics are filled in by [`load_config`],
//! so serializing a loaded configuration and reading it back gives the same
//! value.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tdtransport_core::steady::EnergyQuadrature;
use tdtransport_core::units::CurrentUnit;
use tdtransport_core::{CMatrix, Complex64, DeviceSpec, LeadLabel, LeadSpec, SystemSpec, TransientOptions};

use crate::error::CliError;

/// Distance of the default band bottom below `mu0`, in eV.
pub const DEFAULT_BAND_DEPTH: f64 = 200.0;
/// Default turn-on time of the bias, in fs.
pub const DEFAULT_TURN_ON: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Transient,
    Steady,
    Transmission,
    Selftest,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Mode::Transient => "transient",
            Mode::Steady => "steady",
            Mode::Transmission => "transmission",
            Mode::Selftest => "selftest",
        };
        f.write_str(name)
    }
}

/// Current unit used for every current column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Unit {
    #[default]
    #[serde(rename = "nA")]
    NanoAmpere,
    #[serde(rename = "uA")]
    MicroAmpere,
}

impl From<Unit> for CurrentUnit {
    fn from(unit: Unit) -> Self {
        match unit {
            Unit::NanoAmpere => CurrentUnit::NanoAmpere,
            Unit::MicroAmpere => CurrentUnit::MicroAmpere,
        }
    }
}

impl FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nA" => Ok(Unit::NanoAmpere),
            "uA" => Ok(Unit::MicroAmpere),
            other => Err(format!("unknown current unit {other:?} (expected nA or uA)")),
        }
    }
}

/// Square complex matrix as rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixEntries(pub Vec<Vec<[f64; 2]>>);

impl MatrixEntries {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self(m.rows().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect())
    }

    pub fn to_matrix(&self, field: &str) -> Result<CMatrix, CliError> {
        let rows: Vec<Vec<Complex64>> = self
            .0
            .iter()
            .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        if rows.is_empty() {
            return Err(CliError::Validation(format!("{field}: matrix is empty")));
        }
        CMatrix::from_rows(&rows).map_err(|e| CliError::Validation(format!("{field}: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadConfig {
    /// Line-width matrix `Λ^α` in eV.
    pub lambda: MatrixEntries,
    /// Settled level shift `Δε^α(∞) = −ΔV^α` in eV.
    #[serde(default)]
    pub level_shift: f64,
    /// Turn-on time `a` of the exponential bias ramp in fs.
    #[serde(default = "default_turn_on")]
    pub turn_on_fs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Leads {
    #[serde(rename = "L")]
    pub left: LeadConfig,
    #[serde(rename = "R")]
    pub right: LeadConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Unbiased device Hamiltonian `h_D(0)` in eV.
    pub h0: MatrixEntries,
    #[serde(default)]
    pub charging_strength: f64,
    /// Equilibrium chemical potential in eV.
    #[serde(default)]
    pub mu0: f64,
    pub leads: Leads,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub panels: usize,
    pub points: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = EnergyQuadrature::default();
        Self {
            panels: q.panels,
            points: q.points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Band bottom in eV; `mu0 − 200` when absent.
    #[serde(default)]
    pub eps_min: Option<f64>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            t_end: default_t_end(),
            eps_min: None,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// Energy grid for the transmission mode; `mu0 ± 5` eV when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionGrid {
    pub from: Option<f64>,
    pub to: Option<f64>,
    #[serde(default = "default_grid_points")]
    pub points: usize,
}

impl Default for TransmissionGrid {
    fn default() -> Self {
        Self {
            from: None,
            to: None,
            points: default_grid_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// CSV destination; standard output when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub unit: Unit,
    /// Write every `stride`-th step of a transient.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: None,
            unit: Unit::default(),
            stride: default_stride(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Set by the command line when absent from the file.
    #[serde(default)]
    pub mode: Option<Mode>,
    pub system: SystemConfig,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub transmission: TransmissionGrid,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_turn_on() -> f64 {
    DEFAULT_TURN_ON
}

fn default_dt() -> f64 {
    0.02
}

fn default_t_end() -> f64 {
    25.0
}

fn default_grid_points() -> usize {
    1001
}

fn default_stride() -> usize {
    1
}

impl RunConfig {
    /// Parses JSON text, fills in derived defaults and validates.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(parse_error)?;
        cfg.apply_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    fn apply_defaults(&mut self) {
        let mu0 = self.system.mu0;
        self.numerics.eps_min.get_or_insert(mu0 - DEFAULT_BAND_DEPTH);
        self.transmission.from.get_or_insert(mu0 - 5.0);
        self.transmission.to.get_or_insert(mu0 + 5.0);
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = &self.numerics;
        let positive = |value: f64, name: &str| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(CliError::Validation(format!("{name} must be positive")))
            }
        };
        positive(n.dt, "dt")?;
        positive(n.t_end, "t_end")?;
        if n.dt > n.t_end {
            return Err(CliError::Validation("dt must not exceed t_end".into()));
        }
        if n.quadrature.panels == 0 || n.quadrature.points < 16 {
            return Err(CliError::Validation(
                "numerics.quadrature needs panels >= 1 and points >= 16".into(),
            ));
        }
        if self.output.stride == 0 {
            return Err(CliError::Validation("output.stride must be positive".into()));
        }
        let (from, to) = self.grid_range();
        if !(from < to) || self.transmission.points < 2 {
            return Err(CliError::Validation(
                "transmission grid needs from < to and at least 2 points".into(),
            ));
        }
        self.system_spec()?.validate().into_result().map_err(CliError::from)
    }

    pub fn band_bottom(&self) -> f64 {
        self.numerics
            .eps_min
            .unwrap_or(self.system.mu0 - DEFAULT_BAND_DEPTH)
    }

    pub fn grid_range(&self) -> (f64, f64) {
        let mu0 = self.system.mu0;
        (
            self.transmission.from.unwrap_or(mu0 - 5.0),
            self.transmission.to.unwrap_or(mu0 + 5.0),
        )
    }

    pub fn system_spec(&self) -> Result<SystemSpec, CliError> {
        let s = &self.system;
        let lead = |label: LeadLabel, cfg: &LeadConfig| -> Result<LeadSpec, CliError> {
            let field = format!("system.leads.{}.lambda", label.short());
            let lambda = cfg.lambda.to_matrix(&field)?;
            Ok(LeadSpec::with_level_shift(label, lambda, cfg.level_shift, cfg.turn_on_fs))
        };
        let mut device = DeviceSpec::new(s.h0.to_matrix("system.h0")?);
        device.charging_strength = s.charging_strength;
        Ok(SystemSpec {
            device,
            left: lead(LeadLabel::Left, &s.leads.left)?,
            right: lead(LeadLabel::Right, &s.leads.right)?,
            mu0: s.mu0,
            band_bottom: self.band_bottom(),
        })
    }

    pub fn transient_options(&self) -> TransientOptions {
        TransientOptions::new(self.numerics.dt, self.numerics.t_end)
    }

    pub fn quadrature(&self) -> EnergyQuadrature {
        EnergyQuadrature {
            panels: self.numerics.quadrature.panels,
            points: self.numerics.quadrature.points,
        }
    }
}

/// Reads and validates the configuration at `path`.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        context: format!("reading {}", path.display()),
        source,
    })?;
    RunConfig::from_json(&text)
}

fn parse_error(err: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let path = err.path().to_string();
    let inner = err.inner();
    let message = inner.to_string();
    // serde reports a missing field at its parent; name the field itself
    if let Some(field) = message
        .strip_prefix("missing field `")
        .and_then(|rest| rest.split('`').next())
    {
        let full = if path == "." { field.to_string() } else { format!("{path}.{field}") };
        return CliError::Validation(format!("missing field {full}"));
    }
    CliError::Parse {
        line: inner.line(),
        column: inner.column(),
        path,
        message,
    }
}

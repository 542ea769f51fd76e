//! Physical constants used to convert between eV, fs and nA.

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;

/// One electron per femtosecond expressed in nanoamperes.
pub const NA_PER_ELECTRON_PER_FS: f64 = 1.602_176_634e5;

/// Output scale for currents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurrentUnit {
    #[default]
    NanoAmpere,
    MicroAmpere,
}

impl CurrentUnit {
    /// Factor converting electrons/fs into this unit.
    pub fn per_electron_per_fs(self) -> f64 {
        match self {
            CurrentUnit::NanoAmpere => NA_PER_ELECTRON_PER_FS,
            CurrentUnit::MicroAmpere => NA_PER_ELECTRON_PER_FS * 1e-3,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CurrentUnit::NanoAmpere => "nA",
            CurrentUnit::MicroAmpere => "uA",
        }
    }
}

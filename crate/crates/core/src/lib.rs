//! Transient and steady-state electron transport through a finite device
//! region coupled to two wide-band leads.
//!
//! The device is described by its reduced single-electron density matrix
//! `σ_D(t)`, propagated with a closed equation of motion in which each lead
//! enters through a wide-band-limit dissipation term
//! `Q_α(t) = K^α(t) + {Λ^α, σ_D(t)}`. An independent frequency-domain
//! solver ([`steady`]) provides Landauer currents and stationary density
//! matrices for cross-checking the long-time limit.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and logging live in the companion `tdtransport` crate.
//!
//! Units: energies in eV, times in fs, currents internally in electrons/fs.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod device;
pub mod dissipation;
mod error;
pub mod matcore;
pub mod propagate;
pub mod quadrature;
pub mod special;
pub mod steady;
pub mod units;

pub use error::{Error, Result};
pub use matcore::{CMatrix, EigDecomposition, MatConfig};
pub use num_complex::Complex64;

pub use device::{DeviceSpec, LeadLabel, LeadSpec, SystemSpec, ValidationReport};
pub use dissipation::{DissipationResult, HistoryBuffer, PropagatorState, WblFunctional};
pub use propagate::{ReducedDensityMatrix, TransientOptions, TransientRecord};
pub use steady::SteadyConfig;

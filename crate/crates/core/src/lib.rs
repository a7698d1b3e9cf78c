//! Behavioral simulator of phase-change photonic memory and the analog
//! computing built on it.
//!
//! A GST patch on a waveguide stores a value as programmable optical
//! transmittance. On top of the single-cell model this crate layers the
//! pulse protocol (write / erase / read dispatch by energy, settle-time
//! scheduling), calibrated noise and drift, offset-corrected scalar
//! multiplication, signed matrix–vector products on cell arrays, and
//! mixed-precision Krylov solvers that pair the analog unit with exact
//! residual accounting.
//!
//! Modules:
//! - [`cell`] — single-cell response model and state
//! - [`pulse`] — pulse shapes, scheduling, energy ledger
//! - [`noise`] — noise/drift models and seeded RNG streams
//! - [`mult`] — scalar multiplication on one cell
//! - [`array`] — cell arrays and signed matrix encodings
//! - [`solver`] — CG / GMRES / mixed-precision refinement
//! - [`matrix`] — dense matrices, vectors, file formats
//! - [`calibrate`] — response fitting and calibration profiles
//! - [`svg`] — minimal plot emitter
//! - [`experiments`] — reproducible experiment drivers behind the CLI

pub mod array;
pub mod calibrate;
pub mod cell;
pub mod error;
pub mod experiments;
pub mod matrix;
pub mod mult;
pub mod noise;
pub mod pulse;
pub mod solver;
pub mod svg;

pub use cell::{CellCalibration, CellGeometry, CellState};
pub use error::{Error, Result};
pub use noise::{child_rng, child_seed, rng_from_seed, DeviceRng, DriftModel, NoiseModel};

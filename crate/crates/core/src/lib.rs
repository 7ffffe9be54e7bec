//! Simulation and characterization of a transverse-mode-encoded, post-selected
//! two-photon CNOT gate.
//!
//! The crate is layered bottom-up:
//!
//! * [`modes`]: the four-mode optical space, component transfer matrices,
//!   two-photon propagation with partial distinguishability and post-selection.
//! * [`logical`]: logical-qubit encoding, ideal reference gates and extraction
//!   of the implemented logical operation.
//! * [`tomo`]: projectors, state and process tomography, fidelities,
//!   entanglement measures and CHSH.
//! * [`counts`]: coincidence sampling, HOM delay scans and fits, Monte Carlo
//!   error propagation.

pub mod counts;
pub mod error;
pub mod linalg;
pub mod logical;
pub mod modes;
pub mod tomo;

pub use error::{Error, Result};
pub use linalg::C64;

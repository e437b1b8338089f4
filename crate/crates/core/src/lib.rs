//! Forward simulation of polarization-controlled rephasing 2D electronic spectra of an
//! excitonic dimer, and the process-tomography inversion that recovers χ(T) and the
//! inter-dipole angle from them.

pub mod config;
pub mod dynamics;
pub mod spectroscopy;
pub mod error;
pub mod exciton;
pub mod inversion;
pub mod runner;
pub mod units;

pub use error::{Error, Result};

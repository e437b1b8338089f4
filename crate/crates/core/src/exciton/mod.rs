//! Dimer Hamiltonian, eigenbasis, transition dipoles and pulse amplitudes.

mod dimer;
mod pulse;

pub use dimer::{diagonalize, EigenDimer, SiteDimer, Vec3};
pub use pulse::{gaussian_factor, pulse_amplitude, PulseSpec};

//! Quantum process tomography: peak fitting, angle extraction and χ(T) reconstruction.

mod angle;
mod fit;
mod protocol;
mod reconstruct;
pub mod simplex;
mod systems;

pub use angle::{extract_angle, extract_angle_with, quadratic_coefficients, quadratic_roots, AngleSolution, RootPair, ROOT_TOL};
pub use fit::{fit_peaks, fit_peaks_with, FitHint, FitOptions, PeakFitResult};
pub use protocol::{amplitude_set, run_protocol, ProtocolOptions, QptReport};
pub use reconstruct::{invert_chi, ChiEstimate, InvertOptions, ReconstructedChi, EXTRACTED};
pub use systems::{
    build_systems, condition_number, homodimer_dipoles, kappa, real_gain, rhs_block, solve_least_squares, stacked,
    InversionSystem, Side, UNKNOWNS,
};

//! Rephasing photon-echo signals: Liouville pathways, isotropic averaging, peak amplitudes,
//! 2D spectra and the time-domain polarization.

mod amplitudes;
mod dephasing;
mod homodimer;
mod isotropic;
mod pathways;
mod spectrum;
mod time_domain;

pub use amplitudes::{Exciton, PeakAmplitudeSet, PulseSequence};
pub use dephasing::{coherence_propagator, coherence_propagator_by_label, DephasingSet, State};
pub use homodimer::peak_amplitudes_homodimer;
pub use isotropic::{isotropic_average, oriented_product, Averaging, PolarizationConfig};
pub use pathways::{peak_amplitudes_general, pathway_terms, Dipole, Echo, PathwayTerm};
pub use spectrum::{assemble_spectrum, bracket_warnings, Axis, Spectrum2D};
pub use time_domain::{one_sided_ft, polarization_time_domain, TimeGrid};

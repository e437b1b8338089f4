#![allow(dead_code)]

use dimer_qpt::dynamics::{propagate_chi, ProcessMatrix, RedfieldModel};
use dimer_qpt::exciton::{diagonalize, EigenDimer, PulseSpec, SiteDimer, Vec3};
use dimer_qpt::spectroscopy::{DephasingSet, PulseSequence};
use dimer_qpt::units::sigma_from_fwhm;

pub const TC: f64 = 47.5;

pub fn homodimer(phi_deg: f64) -> EigenDimer {
    diagonalize(&SiteDimer::homodimer(16633.0, 175.0, 1.0, phi_deg.to_radians()).unwrap())
}

pub fn pulses() -> PulseSequence {
    let sigma = sigma_from_fwhm(20.0);
    let p = PulseSpec::new(Vec3::z(), 16546.0, sigma, PulseSpec::unit_lambda(sigma)).unwrap();
    PulseSequence {
        pulses: [p.clone(), p.clone(), p],
        dephasing: DephasingSet::mean_of(1.23e-2, 1.45e-2),
        equal_amplitude: true,
    }
}

pub fn redfield_chi(eigen: &EigenDimer, times: &[f64]) -> ProcessMatrix {
    propagate_chi(&RedfieldModel::porphyrin(eigen.omega_beta - eigen.omega_alpha), eigen, times).unwrap()
}

pub fn half_periods(n: usize) -> Vec<f64> {
    (1..=n).map(|k| 0.5 * TC * k as f64).collect()
}

use super::Vec3;
use crate::error::{Error, Result};
use crate::units::wavenumber_to_angular;
use num_complex::Complex64;
use std::f64::consts::PI;

/// One Gaussian pulse: lab polarization, carrier (cm⁻¹), envelope width σ (fs), amplitude scale λ.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    pub polarization: Vec3,
    pub carrier: f64,
    pub sigma: f64,
    pub lambda_scale: f64,
}

impl PulseSpec {
    pub fn new(polarization: Vec3, carrier: f64, sigma: f64, lambda_scale: f64) -> Result<Self> {
        if ((polarization.norm() - 1.0).abs()) > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "pulse polarization must be a unit vector, |e| = {}",
                polarization.norm()
            )));
        }
        if !(sigma > 0.0) {
            return Err(Error::InvalidInput(format!("pulse sigma must be positive, got {sigma}")));
        }
        Ok(PulseSpec {
            polarization,
            carrier,
            sigma,
            lambda_scale,
        })
    }

    /// Amplitude scale giving an on-resonance coefficient of exactly `-i`.
    pub fn unit_lambda(sigma: f64) -> f64 {
        -1.0 / ((2.0 * PI).sqrt() * sigma)
    }

    /// Coefficient with the Gaussian factor forced to one.
    pub fn resonant_amplitude(&self) -> Complex64 {
        Complex64::new(0.0, self.lambda_scale * (2.0 * PI).sqrt() * self.sigma)
    }
}

/// exp(-σ²δ²/2) for a detuning given in cm⁻¹.
pub fn gaussian_factor(sigma: f64, detuning: f64) -> f64 {
    let d = wavenumber_to_angular(detuning);
    (-0.5 * sigma * sigma * d * d).exp()
}

/// Frequency-amplitude coefficient of `pulse` at a transition energy (cm⁻¹).
pub fn pulse_amplitude(pulse: &PulseSpec, transition_energy: f64) -> Complex64 {
    pulse.resonant_amplitude() * gaussian_factor(pulse.sigma, transition_energy - pulse.carrier)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::sigma_from_fwhm;

    #[test]
    fn on_resonance() {
        let p = PulseSpec::new(Vec3::z(), 16633.0, 8.49, 0.7).unwrap();
        let c = pulse_amplitude(&p, 16633.0);
        assert_eq!(c.re, 0.0);
        assert!((c.im - 0.7 * (2.0 * PI * 8.49f64.powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unit_normalization() {
        let s = sigma_from_fwhm(20.0);
        let p = PulseSpec::new(Vec3::z(), 16633.0, s, PulseSpec::unit_lambda(s)).unwrap();
        let c = pulse_amplitude(&p, 16633.0);
        assert!((c - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn detuned_350() {
        // exponent evaluated directly with δ = 2π·c·350 cm⁻¹
        let delta = 2.0 * PI * 2.997_924_58e-5 * 350.0;
        let expected = (-(8.49 * delta) * (8.49 * delta) / 2.0).exp();
        assert!((gaussian_factor(8.49, 350.0) - expected).abs() < 1e-15);
        assert!((expected - 0.855).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_pulses() {
        assert!(PulseSpec::new(Vec3::new(1.0, 1.0, 0.0), 1.0, 1.0, 1.0).is_err());
        assert!(PulseSpec::new(Vec3::z(), 1.0, 0.0, 1.0).is_err());
    }
}

//! Physical constants and unit conversions.
//!
//! Public interfaces take energies in cm⁻¹ and times in fs; numerics run on
//! angular frequencies in rad/fs.

use std::f64::consts::PI;

/// Speed of light in cm/fs.
pub const SPEED_OF_LIGHT_CM_PER_FS: f64 = 2.997_924_58e-5;

/// Boltzmann constant in cm⁻¹/K.
pub const BOLTZMANN_CM_PER_K: f64 = 0.695_034_800;

/// Converts a wavenumber (cm⁻¹) to an angular frequency (rad/fs).
#[inline]
pub fn wavenumber_to_angular(nu: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT_CM_PER_FS * nu
}

/// Converts an angular frequency (rad/fs) to a wavenumber (cm⁻¹).
#[inline]
pub fn angular_to_wavenumber(omega: f64) -> f64 {
    omega / (2.0 * PI * SPEED_OF_LIGHT_CM_PER_FS)
}

/// Gaussian envelope width σ (fs) for an intensity FWHM (fs).
pub fn sigma_from_fwhm(fwhm: f64) -> f64 {
    fwhm / (8.0 * 2f64.ln()).sqrt()
}

/// Boltzmann factor exp(-gap / k_B T) for a gap in cm⁻¹.
pub fn boltzmann_factor(gap: f64, temperature: f64) -> f64 {
    (-gap / (BOLTZMANN_CM_PER_K * temperature)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let w = wavenumber_to_angular(16633.0);
        assert!((angular_to_wavenumber(w) - 16633.0).abs() < 1e-9);
    }

    #[test]
    fn fwhm_20_fs() {
        assert!((sigma_from_fwhm(20.0) - 8.4932).abs() < 1e-4);
    }
}

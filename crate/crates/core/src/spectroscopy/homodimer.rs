use super::amplitudes::{Exciton, PeakAmplitudeSet, PulseSequence};
use super::isotropic::PolarizationConfig;
use crate::dynamics::{Level, ProcessMatrix};
use crate::error::{Error, Result};
use crate::exciton::EigenDimer;
use num_complex::Complex64;

/// Which of the two tabulated polarization settings applies.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Setting {
    Zzzz,
    Zzxx,
}

fn setting(config: &PolarizationConfig) -> Result<Setting> {
    if config.e == PolarizationConfig::zzzz().e {
        Ok(Setting::Zzzz)
    } else if config.e == PolarizationConfig::zzxx().e {
        Ok(Setting::Zzxx)
    } else {
        Err(Error::InvalidInput(format!(
            "closed-form amplitudes exist only for zzzz and zzxx, got {}",
            config.tag
        )))
    }
}

/// Closed-form isotropically averaged amplitudes for a homodimer.
pub fn peak_amplitudes_homodimer(
    chi: &ProcessMatrix,
    eigen: &EigenDimer,
    pulses: &PulseSequence,
    config: &PolarizationConfig,
) -> Result<PeakAmplitudeSet> {
    let scale = eigen.mu_alpha_g.norm().max(eigen.mu_beta_g.norm());
    let cos = eigen.mu_alpha_g.dot(&eigen.mu_beta_g);
    if eigen.delta.abs() > 1e-9 * eigen.omega_bar || cos.abs() > 1e-9 * scale * scale {
        return Err(Error::NotHomodimer(format!(
            "delta = {} cm^-1, mu_alpha_g . mu_beta_g = {cos}",
            eigen.delta
        )));
    }
    let set = setting(config)?;
    let a = eigen.mu_alpha_g.norm_squared();
    let b = eigen.mu_beta_g.norm_squared();
    let ab = a * b;
    let c = pulses.coefficients(eigen);
    let mi = Complex64::new(0.0, -1.0);
    // −i·C₁ᵖC₂ᵠC₃ʳ
    let k = |p: Exciton, q: Exciton, r: Exciton| {
        mi * c[0][p.index()] * c[1][q.index()] * c[2][r.index()]
    };
    use Exciton::{Alpha as Xa, Beta as Xb};
    use Level::{Alpha as A, Beta as B, G};
    let (big, small, cross) = match set {
        Setting::Zzzz => (1.0 / 5.0, 1.0 / 15.0, -2.0 / 15.0),
        Setting::Zzxx => (1.0 / 15.0, 2.0 / 15.0, 1.0 / 15.0),
    };
    let mut values = Vec::with_capacity(chi.len());
    for t in 0..chi.len() {
        let x = |p: Level, q: Level, r: Level, s: Level| chi.entry(t, p, q, r, s);
        let one = Complex64::new(1.0, 0.0);
        let s_aa = k(Xa, Xa, Xa) * (big * a * a * (x(G, G, A, A)? - one - x(A, A, A, A)?) + small * ab * x(B, B, A, A)?)
            + k(Xa, Xb, Xb) * (cross * ab * x(A, B, B, A)?);
        let s_ab = k(Xa, Xa, Xb) * (small * ab * (x(G, G, A, A)? - one - x(B, B, A, A)?) + big * a * a * x(A, A, A, A)?)
            + k(Xa, Xb, Xa) * (cross * ab * x(B, A, B, A)?);
        let s_bb = k(Xb, Xb, Xb) * (big * b * b * (x(G, G, B, B)? - one - x(B, B, B, B)?) + small * ab * x(A, A, B, B)?)
            + k(Xb, Xa, Xa) * (cross * ab * x(B, A, A, B)?);
        let s_ba = k(Xb, Xb, Xa) * (small * ab * (x(G, G, B, B)? - one - x(A, A, B, B)?) + big * b * b * x(B, B, B, B)?)
            + k(Xb, Xa, Xb) * (cross * ab * x(A, B, A, B)?);
        values.push([[s_aa, s_ab], [s_ba, s_bb]]);
    }
    Ok(PeakAmplitudeSet {
        times: chi.times().to_vec(),
        values,
        config: config.tag.clone(),
        carriers: pulses.carriers(),
    })
}

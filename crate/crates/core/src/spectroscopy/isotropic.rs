use crate::error::{Error, Result};
use crate::exciton::Vec3;

/// Lab-frame polarizations of the three pulses and the local oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationConfig {
    pub e: [Vec3; 4],
    pub tag: String,
}

impl PolarizationConfig {
    pub fn new(e: [Vec3; 4], tag: impl Into<String>) -> Result<Self> {
        if e.iter().any(|v| (v.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidInput("polarization vectors must be unit vectors".into()));
        }
        Ok(PolarizationConfig { e, tag: tag.into() })
    }

    pub fn zzzz() -> Self {
        PolarizationConfig {
            e: [Vec3::z(); 4],
            tag: "zzzz".into(),
        }
    }

    pub fn zzxx() -> Self {
        PolarizationConfig {
            e: [Vec3::z(), Vec3::z(), Vec3::x(), Vec3::x()],
            tag: "zzxx".into(),
        }
    }

    /// Parses a four-letter tag over {x, y, z}.
    pub fn from_tag(tag: &str) -> Result<Self> {
        let axes: Option<Vec<Vec3>> = tag
            .chars()
            .map(|c| match c {
                'x' => Some(Vec3::x()),
                'y' => Some(Vec3::y()),
                'z' => Some(Vec3::z()),
                _ => None,
            })
            .collect();
        match axes {
            Some(v) if v.len() == 4 => Ok(PolarizationConfig {
                e: [v[0], v[1], v[2], v[3]],
                tag: tag.to_string(),
            }),
            _ => Err(Error::InvalidInput(format!("bad polarization tag {tag:?}"))),
        }
    }
}

/// Whether dipole products are orientationally averaged or taken in a fixed frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    Isotropic,
    Fixed,
}

/// ⟨(μa·e1)(μb·e2)(μc·e3)(μd·e4)⟩ over an isotropic ensemble.
pub fn isotropic_average(mu: [&Vec3; 4], config: &PolarizationConfig) -> f64 {
    let [a, b, c, d] = mu;
    let [e1, e2, e3, e4] = &config.e;
    let lab = [e1.dot(e2) * e3.dot(e4), e1.dot(e3) * e2.dot(e4), e1.dot(e4) * e2.dot(e3)];
    let mol = [a.dot(b) * c.dot(d), a.dot(c) * b.dot(d), a.dot(d) * b.dot(c)];
    let mut sum = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let w = if i == j { 4.0 } else { -1.0 };
            sum += lab[i] * w * mol[j];
        }
    }
    sum / 30.0
}

/// Dipole product for molecules frozen in the lab frame.
pub fn oriented_product(mu: [&Vec3; 4], config: &PolarizationConfig) -> f64 {
    mu.iter().zip(&config.e).map(|(m, e)| m.dot(e)).product()
}

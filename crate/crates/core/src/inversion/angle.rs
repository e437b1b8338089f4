//! Dipole angle from the two quadratic identities in ξ = tan²(φ/2).

use crate::error::{Error, Result};
use crate::spectroscopy::{Exciton, PeakAmplitudeSet};
use num_complex::Complex64;
use serde::Serialize;

pub const ROOT_TOL: f64 = 1e-3;

/// Per-T quadratic data and roots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootPair {
    pub time: f64,
    /// [ξ², ξ, 1] coefficients.
    pub coeffs_eq1: [f64; 3],
    pub coeffs_eq2: [f64; 3],
    pub roots_eq1: Vec<Complex64>,
    pub roots_eq2: Vec<Complex64>,
    /// Mean of the matched pair.
    pub xi: f64,
    /// |r₁ − r₂| for the matched pair.
    pub mismatch: f64,
    /// More than one pair matched within tolerance.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleSolution {
    pub per_time: Vec<RootPair>,
    pub xi: f64,
    /// radians
    pub phi: f64,
    /// max − min of the per-T ξ.
    pub spread: f64,
    pub ambiguous: bool,
}

impl AngleSolution {
    pub fn phi_deg(&self) -> f64 {
        self.phi.to_degrees()
    }
}

/// Roots of a ξ² + b ξ + c, falling back to the linear case when `a` is negligible.
pub fn quadratic_roots(q: [f64; 3]) -> Vec<Complex64> {
    let [a, b, c] = q;
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-12 * scale {
        if b.abs() <= 1e-12 * scale {
            return Vec::new();
        }
        return vec![Complex64::new(-c / b, 0.0)];
    }
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        // cancellation-free form
        let t = -0.5 * (b + b.signum() * disc.sqrt());
        let (r1, r2) = if t == 0.0 { (0.0, 0.0) } else { (t / a, c / t) };
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        vec![Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let re = -b / (2.0 * a);
        let im = (-disc).sqrt() / (2.0 * a.abs());
        vec![Complex64::new(re, -im), Complex64::new(re, im)]
    }
}

/// Coefficients of both identities from the real parts of the eight amplitudes at index k.
pub fn quadratic_coefficients(zzzz: &PeakAmplitudeSet, zzxx: &PeakAmplitudeSet, k: usize) -> ([f64; 3], [f64; 3]) {
    use Exciton::{Alpha as A, Beta as B};
    let z = |m, n| zzzz.get(k, m, n).re;
    let x = |m, n| zzxx.get(k, m, n).re;
    let (zaa, zab, zba, zbb) = (z(A, A), z(A, B), z(B, A), z(B, B));
    let (xaa, xab, xba, xbb) = (x(A, A), x(A, B), x(B, A), x(B, B));
    let eq1 = [
        zba - 3.0 * xba - 2.0 * zab + xab,
        5.0 * zba + 2.0 * zbb + 4.0 * xbb - 5.0 * zab - 2.0 * zaa - 4.0 * xaa,
        2.0 * zba - xba - zab + 3.0 * xab,
    ];
    let eq2 = [
        2.0 * zaa - xaa - zbb + 3.0 * xbb,
        zaa - 8.0 * xaa - 2.0 * zab - 4.0 * xab - zbb + 8.0 * xbb + 2.0 * zba + 4.0 * xba,
        zaa - 3.0 * xaa - 2.0 * zbb + xbb,
    ];
    (eq1, eq2)
}

fn positive_real(roots: &[Complex64]) -> Vec<f64> {
    roots
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * z.re.abs().max(1.0) && z.re > 0.0)
        .map(|z| z.re)
        .collect()
}

pub fn extract_angle(zzzz: &PeakAmplitudeSet, zzxx: &PeakAmplitudeSet) -> Result<AngleSolution> {
    extract_angle_with(zzzz, zzxx, ROOT_TOL)
}

pub fn extract_angle_with(zzzz: &PeakAmplitudeSet, zzxx: &PeakAmplitudeSet, tol: f64) -> Result<AngleSolution> {
    if zzzz.times.is_empty() || zzzz.times.len() != zzxx.times.len() {
        return Err(Error::InvalidInput(format!(
            "need matching non-empty amplitude sets, got {} zzzz and {} zzxx waiting times",
            zzzz.times.len(),
            zzxx.times.len()
        )));
    }
    let mut per_time = Vec::with_capacity(zzzz.times.len());
    for k in 0..zzzz.times.len() {
        let time = zzzz.times[k];
        let (c1, c2) = quadratic_coefficients(zzzz, zzxx, k);
        let r1 = quadratic_roots(c1);
        let r2 = quadratic_roots(c2);
        let (p1, p2) = (positive_real(&r1), positive_real(&r2));
        let mut pairs: Vec<(f64, f64)> = p1
            .iter()
            .flat_map(|&a| p2.iter().map(move |&b| ((a - b).abs(), 0.5 * (a + b))))
            .filter(|(d, _)| *d <= tol)
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let Some(&(mismatch, xi)) = pairs.first() else {
            return Err(Error::NoCommonRoot {
                time,
                eq1: r1.iter().map(|z| z.re).collect(),
                eq2: r2.iter().map(|z| z.re).collect(),
            });
        };
        per_time.push(RootPair {
            time,
            coeffs_eq1: c1,
            coeffs_eq2: c2,
            roots_eq1: r1,
            roots_eq2: r2,
            xi,
            mismatch,
            ambiguous: pairs.len() > 1,
        });
    }
    let xi = per_time.iter().map(|r| r.xi).sum::<f64>() / per_time.len() as f64;
    let lo = per_time.iter().map(|r| r.xi).fold(f64::INFINITY, f64::min);
    let hi = per_time.iter().map(|r| r.xi).fold(f64::NEG_INFINITY, f64::max);
    Ok(AngleSolution {
        ambiguous: per_time.iter().any(|r| r.ambiguous),
        per_time,
        xi,
        phi: 2.0 * xi.sqrt().atan(),
        spread: hi - lo,
    })
}

//! Dipole-weight linear systems linking χ(T) to the sixteen real peak amplitudes.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

pub const UNKNOWNS: [&str; 8] = [
    "chi_aaaa",
    "chi_bbaa",
    "chi_bbbb",
    "chi_aabb",
    "re_chi_abab",
    "re_chi_baab",
    "im_chi_abab",
    "im_chi_baab",
];

/// Which half of the spectrum a block comes from: diagonal peak m and cross peak m→n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// S_αα and S_αβ.
    Left,
    /// S_ββ and S_βα.
    Right,
}

/// One 8×6 block (`matrix`) and its position among the eight stacked unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionSystem {
    pub side: Side,
    /// Already multiplied by the real gain iC³.
    pub matrix: DMatrix<f64>,
    pub columns: [usize; 6],
    pub mu_alpha_sq: f64,
    pub mu_beta_sq: f64,
    pub gain: f64,
}

/// Squared eigenstate dipoles of a homodimer with site dipole norm `d`.
pub fn homodimer_dipoles(phi: f64, d: f64) -> (f64, f64) {
    let c = (0.5 * phi).cos();
    let s = (0.5 * phi).sin();
    (2.0 * d * d * c * c, 2.0 * d * d * s * s)
}

/// iC³ as a real number; the systems are only real when C is purely imaginary.
pub fn real_gain(c: Complex64) -> Result<f64> {
    let g = Complex64::new(0.0, 1.0) * c * c * c;
    if g.im.abs() > 1e-12 * g.norm() || g.norm() == 0.0 {
        return Err(Error::InvalidInput(format!(
            "pulse coefficient {c} does not give a real nonzero iC^3 ({g})"
        )));
    }
    Ok(g.re)
}

fn block(p: f64, q: f64, gain: f64, side: Side) -> DMatrix<f64> {
    // p = μ² of the diagonal-peak exciton, q = μ² of the other one
    let pp = p * p;
    let pq = p * q;
    let sgn = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    #[rustfmt::skip]
    let rows = [
        [2.0 / 5.0 * pp, pp / 5.0 - pq / 15.0, 0.0, 2.0 / 15.0 * pq, 0.0, 0.0],
        [2.0 / 15.0 * pp, pp / 15.0 - 2.0 / 15.0 * pq, 0.0, -pq / 15.0, 0.0, 0.0],
        [-pp / 5.0 + pq / 15.0, 2.0 / 15.0 * pq, 2.0 / 15.0 * pq, 0.0, 0.0, 0.0],
        [-pp / 15.0 + 2.0 / 15.0 * pq, 4.0 / 15.0 * pq, -pq / 15.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, -sgn * 2.0 / 15.0 * pq],
        [0.0, 0.0, 0.0, 0.0, 0.0, sgn * pq / 15.0],
        [0.0, 0.0, 0.0, 0.0, -sgn * 2.0 / 15.0 * pq, 0.0],
        [0.0, 0.0, 0.0, 0.0, sgn * pq / 15.0, 0.0],
    ];
    DMatrix::from_fn(8, 6, |r, c| gain * rows[r][c])
}

/// LHS and RHS blocks for a homodimer at angle `phi` with dipole norm `d` and pulse
/// coefficient `c`.
pub fn build_systems(phi: f64, d: f64, c: Complex64) -> Result<(InversionSystem, InversionSystem)> {
    if !(phi > 0.0 && phi < std::f64::consts::PI) {
        return Err(Error::DarkState(phi));
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidInput(format!("dipole norm must be positive, got {d}")));
    }
    let gain = real_gain(c)?;
    let (a, b) = homodimer_dipoles(phi, d);
    if a * b == 0.0 {
        return Err(Error::DarkState(phi));
    }
    Ok((
        InversionSystem {
            side: Side::Left,
            matrix: block(a, b, gain, Side::Left),
            columns: [0, 1, 4, 5, 6, 7],
            mu_alpha_sq: a,
            mu_beta_sq: b,
            gain,
        },
        InversionSystem {
            side: Side::Right,
            matrix: block(b, a, gain, Side::Right),
            columns: [2, 3, 4, 5, 6, 7],
            mu_alpha_sq: a,
            mu_beta_sq: b,
            gain,
        },
    ))
}

/// The 16×8 matrix acting on the unknowns in [`UNKNOWNS`] order.
pub fn stacked(lhs: &InversionSystem, rhs: &InversionSystem) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(16, 8);
    for (offset, sys) in [(0, lhs), (8, rhs)] {
        for r in 0..8 {
            for (k, &c) in sys.columns.iter().enumerate() {
                m[(offset + r, c)] = sys.matrix[(r, k)];
            }
        }
    }
    m
}

/// Right-hand side for one waiting time: for the diagonal peak d and cross peak x of a side,
/// [Re d_zzzz, Re d_zzxx, Re x_zzzz, Re x_zzxx, Im d_zzzz, Im d_zzxx, Im x_zzzz, Im x_zzxx].
pub fn rhs_block(diag: [Complex64; 2], cross: [Complex64; 2]) -> DVector<f64> {
    DVector::from_vec(vec![
        diag[0].re, diag[1].re, cross[0].re, cross[1].re, diag[0].im, diag[1].im, cross[0].im, cross[1].im,
    ])
}

/// κ = σ_max/σ_min; infinite when σ_min is below the working floor.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min <= max * f64::EPSILON * (m.nrows().max(m.ncols()) as f64) {
        f64::INFINITY
    } else {
        max / min
    }
}

/// κ of the stacked system at angle `phi` (unit dipoles, unit gain).
pub fn kappa(phi: f64) -> f64 {
    match build_systems(phi, 1.0, Complex64::new(0.0, -1.0)) {
        Ok((l, r)) => condition_number(&stacked(&l, &r)),
        Err(_) => f64::INFINITY,
    }
}

/// Least-squares solution with optional ridge term `ridge·‖x‖²`.
pub fn solve_least_squares(m: &DMatrix<f64>, rhs: &DVector<f64>, ridge: f64) -> Result<DVector<f64>> {
    if ridge > 0.0 {
        let n = m.ncols();
        let a = m.transpose() * m + DMatrix::identity(n, n) * ridge;
        let b = m.transpose() * rhs;
        return a
            .cholesky()
            .map(|c| c.solve(&b))
            .ok_or_else(|| Error::InvalidInput("ridge system is not positive definite".into()));
    }
    m.clone()
        .svd(true, true)
        .solve(rhs, 1e-14 * m.norm())
        .map_err(|e| Error::InvalidInput(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn right_angle_first_entry() {
        // C = −i gives iC³ = −1
        let (l, _) = build_systems(PI / 2.0, 1.0, Complex64::new(0.0, -1.0)).unwrap();
        assert!((l.matrix[(0, 0)] + 2.0 / 5.0).abs() < 1e-15);
        assert!((l.gain + 1.0).abs() < 1e-15);
    }

    #[test]
    fn coupling_scale_at_65_degrees() {
        let (a, b) = homodimer_dipoles(65f64.to_radians(), 1.0);
        let want = 4.0 * 32.5f64.to_radians().cos().powi(2) * 32.5f64.to_radians().sin().powi(2);
        assert!((a * b - want).abs() < 1e-14);
        assert!((a * b - 65f64.to_radians().sin().powi(2)).abs() < 1e-14);
        assert!((a * b - 0.8216).abs() < 1e-3);
    }

    #[test]
    fn right_angle_sides_match_up_to_relabeling() {
        let (l, r) = build_systems(PI / 2.0, 1.3, Complex64::new(0.0, 2.0)).unwrap();
        for row in 0..4 {
            for c in 0..6 {
                assert!((l.matrix[(row, c)] - r.matrix[(row, c)]).abs() < 1e-14 * l.matrix.amax());
            }
        }
        for row in 4..8 {
            for c in 0..6 {
                assert!((l.matrix[(row, c)] + r.matrix[(row, c)]).abs() < 1e-14 * l.matrix.amax());
            }
        }
    }

    #[test]
    fn kappa_matches_gram_eigenvalues() {
        for phi in [0.3 * PI, 0.4 * PI, PI / 2.0, 0.65 * PI] {
            let (l, r) = build_systems(phi, 1.0, Complex64::new(0.0, -1.0)).unwrap();
            let m = stacked(&l, &r);
            let ev = (m.transpose() * &m).symmetric_eigen().eigenvalues;
            let want = (ev.max() / ev.min()).sqrt();
            assert!((kappa(phi) - want).abs() < 1e-8 * want, "{phi}: {} vs {want}", kappa(phi));
        }
    }

    #[test]
    fn dark_states_rejected() {
        assert!(matches!(build_systems(0.0, 1.0, Complex64::new(0.0, -1.0)), Err(Error::DarkState(_))));
        assert!(matches!(build_systems(PI, 1.0, Complex64::new(0.0, -1.0)), Err(Error::DarkState(_))));
        assert!(build_systems(1.0, 1.0, Complex64::new(1.0, 0.0)).is_err());
        assert!(kappa(0.0).is_infinite());
    }

    #[test]
    fn kappa_minimum_near_four() {
        let k = kappa(PI / 2.0);
        assert!((k - 3.9).abs() < 0.2, "{k}");
        for phi in [0.45 * PI, 0.55 * PI, 0.3 * PI] {
            assert!(kappa(phi) > k);
        }
    }
}

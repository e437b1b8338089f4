//! χ(T) from the eight peak amplitudes of each polarization setting.

use super::systems::{build_systems, condition_number, rhs_block, solve_least_squares, stacked};
use crate::dynamics::{Level, ProcessMatrix};
use crate::error::{Error, Result};
use crate::spectroscopy::{Exciton, PeakAmplitudeSet};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct InvertOptions {
    pub kappa_threshold: f64,
    /// Tikhonov weight for the stacked least-squares route; 0 disables it.
    pub ridge: f64,
}

impl Default for InvertOptions {
    fn default() -> Self {
        InvertOptions {
            kappa_threshold: 15.0,
            ridge: 0.0,
        }
    }
}

/// Both routes at one waiting time. Vectors follow [`super::UNKNOWNS`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiEstimate {
    pub time: f64,
    pub closed_form: [f64; 8],
    pub least_squares: [f64; 8],
    /// χ_ggαα and χ_ggββ from the trace rule.
    pub gg_aa: f64,
    pub gg_bb: f64,
    /// Re χ_αβαβ and Re χ_βααβ from each side of the spectrum.
    pub re_abab_sides: [f64; 2],
    pub re_baab_sides: [f64; 2],
    /// The four determinations averaged into each imaginary part.
    pub im_abab_values: [f64; 4],
    pub im_baab_values: [f64; 4],
}

impl ChiEstimate {
    pub fn route_disagreement(&self) -> f64 {
        self.closed_form
            .iter()
            .zip(&self.least_squares)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn side_disagreement(&self) -> f64 {
        (self.re_abab_sides[0] - self.re_abab_sides[1])
            .abs()
            .max((self.re_baab_sides[0] - self.re_baab_sides[1]).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructedChi {
    pub phi: f64,
    pub d: f64,
    pub gain: f64,
    pub kappa: f64,
    pub low_confidence: bool,
    pub estimates: Vec<ChiEstimate>,
}

/// Entries of χ that the two-setting protocol determines.
pub const EXTRACTED: [(Level, Level, Level, Level); 13] = {
    use Level::{Alpha as A, Beta as B, G};
    [
        (G, G, A, A),
        (A, A, A, A),
        (B, B, A, A),
        (G, G, B, B),
        (B, B, B, B),
        (A, A, B, B),
        (A, B, A, B),
        (B, A, B, A),
        (B, A, A, B),
        (A, B, B, A),
        (G, G, G, G),
        (A, A, G, G),
        (B, B, G, G),
    ]
};

impl ReconstructedChi {
    pub fn times(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.time).collect()
    }

    pub fn max_route_disagreement(&self) -> f64 {
        self.estimates.iter().map(|e| e.route_disagreement()).fold(0.0, f64::max)
    }

    pub fn max_side_disagreement(&self) -> f64 {
        self.estimates.iter().map(|e| e.side_disagreement()).fold(0.0, f64::max)
    }

    /// Closed-form route as a process matrix; undetermined entries are zero and the
    /// ground state is taken as inert.
    pub fn to_process_matrix(&self) -> ProcessMatrix {
        use Level::{Alpha as A, Beta as B, G};
        let mut chi = ProcessMatrix::zeros(self.times());
        let r = |x: f64| Complex64::new(x, 0.0);
        for (k, e) in self.estimates.iter().enumerate() {
            let v = &e.closed_form;
            chi.set(k, G, G, G, G, r(1.0));
            chi.set(k, G, G, A, A, r(e.gg_aa));
            chi.set(k, A, A, A, A, r(v[0]));
            chi.set(k, B, B, A, A, r(v[1]));
            chi.set(k, G, G, B, B, r(e.gg_bb));
            chi.set(k, B, B, B, B, r(v[2]));
            chi.set(k, A, A, B, B, r(v[3]));
            let abab = Complex64::new(v[4], v[6]);
            let baab = Complex64::new(v[5], v[7]);
            chi.set(k, A, B, A, B, abab);
            chi.set(k, B, A, B, A, abab.conj());
            chi.set(k, B, A, A, B, baab);
            chi.set(k, A, B, B, A, baab.conj());
        }
        chi
    }
}

/// Closed-form and least-squares inversion at every waiting time.
///
/// `c` is the common pulse coefficient; together with `d` it fixes the absolute scale.
pub fn invert_chi(
    zzzz: &PeakAmplitudeSet,
    zzxx: &PeakAmplitudeSet,
    phi: f64,
    d: f64,
    c: Complex64,
    opts: &InvertOptions,
) -> Result<ReconstructedChi> {
    if zzzz.times.len() != zzxx.times.len() || zzzz.times.is_empty() {
        return Err(Error::InvalidInput("amplitude sets must be non-empty and cover the same waiting times".into()));
    }
    if !zzzz.is_finite() || !zzxx.is_finite() {
        return Err(Error::InvalidInput("non-finite peak amplitudes".into()));
    }
    let (lhs, rhs) = build_systems(phi, d, c)?;
    let m = stacked(&lhs, &rhs);
    let kappa = condition_number(&m);
    let g = lhs.gain;
    let d4 = d.powi(4);
    let k = 3.0 / (4.0 * g * d4);
    let (cp, sp) = ((0.5 * phi).cos(), (0.5 * phi).sin());
    let (sec2, csc2) = (1.0 / (cp * cp), 1.0 / (sp * sp));
    let (t2, ct2) = (sp * sp / (cp * cp), cp * cp / (sp * sp));
    let cphi = phi.cos();
    let im_scale = 15.0 * sec2 * csc2 / (8.0 * g * d4);

    use Exciton::{Alpha as A, Beta as B};
    let mut estimates = Vec::with_capacity(zzzz.times.len());
    for t in 0..zzzz.times.len() {
        let z = |m, n| zzzz.get(t, m, n);
        let x = |m, n| zzxx.get(t, m, n);
        let (zaa, zab, zba, zbb) = (z(A, A), z(A, B), z(B, A), z(B, B));
        let (xaa, xab, xba, xbb) = (x(A, A), x(A, B), x(B, A), x(B, B));
        let saa = (zaa + 2.0 * xaa).re;
        let sab = (zab + 2.0 * xab).re;
        let sbb = (zbb + 2.0 * xbb).re;
        let sba = (zba + 2.0 * xba).re;

        let gg_aa = 1.0 - k * sec2 * (saa + sab);
        let aaaa = -k * sec2 * ((cphi - 1.0) * saa + cphi * sab);
        let bbaa = k * sec2 * (cphi * saa + (cphi + 1.0) * sab);
        let abab_l = k * (2.0 * saa + (ct2 + 2.0 * t2 + 5.0) * zab.re - (3.0 * ct2 + t2) * xab.re);
        let baab_l = k * ((ct2 + 2.0 * t2 + 1.0) * zaa.re - (3.0 * ct2 + t2 + 8.0) * xaa.re - 2.0 * sab);

        let gg_bb = 1.0 - k * csc2 * (sbb + sba);
        let bbbb = k * csc2 * ((cphi + 1.0) * sbb + cphi * sba);
        let aabb = -k * csc2 * (cphi * sbb + (cphi - 1.0) * sba);
        let abab_r = k * (2.0 * sbb + (t2 + 2.0 * ct2 + 5.0) * zba.re - (3.0 * t2 + ct2) * xba.re);
        let baab_r = k * ((t2 + 2.0 * ct2 + 1.0) * zbb.re - (3.0 * t2 + ct2 + 8.0) * xbb.re - 2.0 * sba);

        let im_abab = [-zab.im, 2.0 * xab.im, zba.im, -2.0 * xba.im].map(|v| im_scale * v);
        let im_baab = [-zaa.im, 2.0 * xaa.im, zbb.im, -2.0 * xbb.im].map(|v| im_scale * v);
        let mean = |v: &[f64; 4]| v.iter().sum::<f64>() / 4.0;

        let closed_form = [
            aaaa,
            bbaa,
            bbbb,
            aabb,
            0.5 * (abab_l + abab_r),
            0.5 * (baab_l + baab_r),
            mean(&im_abab),
            mean(&im_baab),
        ];
        let mut b = rhs_block([zaa, xaa], [zab, xab]).as_slice().to_vec();
        b.extend_from_slice(rhs_block([zbb, xbb], [zba, xba]).as_slice());
        let ls = solve_least_squares(&m, &nalgebra::DVector::from_vec(b), opts.ridge)?;
        estimates.push(ChiEstimate {
            time: zzzz.times[t],
            closed_form,
            least_squares: std::array::from_fn(|i| ls[i]),
            gg_aa,
            gg_bb,
            re_abab_sides: [abab_l, abab_r],
            re_baab_sides: [baab_l, baab_r],
            im_abab_values: im_abab,
            im_baab_values: im_baab,
        });
    }
    Ok(ReconstructedChi {
        phi,
        d,
        gain: g,
        kappa,
        low_confidence: !(kappa <= opts.kappa_threshold),
        estimates,
    })
}

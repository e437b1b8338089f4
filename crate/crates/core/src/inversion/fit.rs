//! Peak fitting: complex Lorentzian products fitted to a 2D spectrum.
//!
//! The model is y(ω_τ, ω_t) = i Σ_mn S_mn l_τ,m(ω_τ) l_t,n(ω_t) with a common width Γ.
//! A bounded simplex search runs on the three nonlinear parameters with the amplitudes
//! projected out, on a thinned grid; a damped Gauss–Newton pass then refines all eleven
//! real parameters against the full grid.

use super::simplex::{minimize, SimplexOptions};
use crate::error::{Error, Result};
use crate::spectroscopy::{Axis, Spectrum2D};
use crate::units::{angular_to_wavenumber, wavenumber_to_angular};
use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C = Complex64;
const I: C = C::new(0.0, 1.0);
const ZERO: C = C::new(0.0, 0.0);

/// Starting point for the fit. `gamma` is in fs⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitHint {
    pub omega_alpha: f64,
    pub omega_beta: f64,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub simplex: SimplexOptions,
    pub restarts: usize,
    /// Thinning target for the simplex stage: at most this many points per axis.
    pub coarse_points: usize,
    pub polish_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            simplex: SimplexOptions::default(),
            restarts: 3,
            coarse_points: 160,
            polish_iterations: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakFitResult {
    pub waiting_time: f64,
    pub config: String,
    /// cm⁻¹
    pub omega_alpha_g: f64,
    /// cm⁻¹
    pub omega_beta_g: f64,
    /// fs⁻¹
    pub gamma: f64,
    /// S[m][n], α = 0, β = 1.
    pub s: [[Complex64; 2]; 2],
    /// ‖y − model‖ over the full grid.
    pub residual_norm: f64,
    /// residual_norm / ‖y‖ (0 for an empty grid).
    pub relative_residual: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub warnings: Vec<String>,
}

/// Angular-frequency samples of an axis, optionally thinned.
fn samples(axis: &Axis, stride: usize) -> (Vec<usize>, Vec<f64>) {
    let idx: Vec<usize> = (0..axis.len).step_by(stride.max(1)).collect();
    let w = idx.iter().map(|&i| wavenumber_to_angular(axis.value(i))).collect();
    (idx, w)
}

/// u, u² for l_τ centered at `c` (angular).
fn tau_funcs(w: &[f64], c: f64, g: f64) -> (Vec<C>, Vec<C>) {
    let u: Vec<C> = w.iter().map(|&x| C::new(g, x - c).inv()).collect();
    let u2 = u.iter().map(|z| z * z).collect();
    (u, u2)
}

fn t_funcs(w: &[f64], c: f64, g: f64) -> (Vec<C>, Vec<C>) {
    let v: Vec<C> = w.iter().map(|&x| C::new(g, c - x).inv()).collect();
    let v2 = v.iter().map(|z| z * z).collect();
    (v, v2)
}

fn gram(f: &[&[C]]) -> Vec<Vec<C>> {
    f.iter()
        .map(|a| f.iter().map(|b| a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()).collect())
        .collect()
}

/// Q[k][l] = Σ_ij conj(a_k(i)) conj(b_l(j)) y_ij over the sampled rows/columns.
fn project(y: &[C], nt: usize, rows: &[usize], cols: &[usize], a: &[&[C]], b: &[&[C]]) -> Vec<Vec<C>> {
    let mut q = vec![vec![ZERO; b.len()]; a.len()];
    let bc: Vec<Vec<C>> = b.iter().map(|f| f.iter().map(|z| z.conj()).collect()).collect();
    let mut r = vec![ZERO; b.len()];
    for (ii, &i) in rows.iter().enumerate() {
        let row = &y[i * nt..(i + 1) * nt];
        for (l, f) in bc.iter().enumerate() {
            r[l] = cols.iter().zip(f).map(|(&j, z)| row[j] * z).sum();
        }
        for (k, f) in a.iter().enumerate() {
            let w = f[ii].conj();
            for l in 0..b.len() {
                q[k][l] += w * r[l];
            }
        }
    }
    q
}

struct Grid<'a> {
    y: &'a [C],
    nt: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    wt: Vec<f64>,
    wn: Vec<f64>,
    norm2: f64,
}

impl<'a> Grid<'a> {
    fn new(spec: &'a Spectrum2D, stride_tau: usize, stride_t: usize) -> Self {
        let (rows, wt) = samples(&spec.omega_tau, stride_tau);
        let (cols, wn) = samples(&spec.omega_t, stride_t);
        let nt = spec.omega_t.len;
        let norm2 = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| spec.values[i * nt + j].norm_sqr()))
            .sum();
        Grid { y: &spec.values, nt, rows, cols, wt, wn, norm2 }
    }

    /// Amplitudes projected out for fixed centers and width (all angular).
    /// Returns (relative misfit, S).
    fn projected(&self, wa: f64, wb: f64, g: f64) -> (f64, [[C; 2]; 2]) {
        let (ua, _) = tau_funcs(&self.wt, wa, g);
        let (ub, _) = tau_funcs(&self.wt, wb, g);
        let (va, _) = t_funcs(&self.wn, wa, g);
        let (vb, _) = t_funcs(&self.wn, wb, g);
        let gu = gram(&[&ua, &ub]);
        let gv = gram(&[&va, &vb]);
        let q = project(self.y, self.nt, &self.rows, &self.cols, &[&ua, &ub], &[&va, &vb]);
        let g4 = Matrix4::from_fn(|r, c| gu[r / 2][c / 2] * gv[r % 2][c % 2]);
        let b = Vector4::from_fn(|r, _| -I * q[r / 2][r % 2]);
        let Some(ch) = g4.cholesky() else {
            return (1.0, [[ZERO; 2]; 2]);
        };
        let s = ch.solve(&b);
        let explained = b.dotc(&s).re;
        let f = (self.norm2 - explained).max(0.0) / self.norm2;
        (f, [[s[0], s[1]], [s[2], s[3]]])
    }
}

fn local_maxima(p: &[f64]) -> Vec<usize> {
    let mut out: Vec<usize> = (0..p.len())
        .filter(|&i| {
            p[i] > 0.0 && (i == 0 || p[i] >= p[i - 1]) && (i + 1 == p.len() || p[i] > p[i + 1])
        })
        .collect();
    out.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
    out
}

fn half_width(p: &[f64], peak: usize, step: f64) -> Option<f64> {
    let half = 0.5 * p[peak];
    let left = (0..peak).rev().find(|&i| p[i] < half).map(|i| (peak - i) as f64 * step);
    let right = (peak + 1..p.len()).find(|&i| p[i] < half).map(|i| (i - peak) as f64 * step);
    match (left, right) {
        (Some(l), Some(r)) => Some(l.min(r)),
        (a, b) => a.or(b),
    }
}

/// Centers (cm⁻¹) and width (cm⁻¹ equivalent) from the marginal |y| profiles.
fn initial_guess(spec: &Spectrum2D) -> (f64, f64, f64, bool) {
    let (nt_, nn) = (spec.omega_tau.len, spec.omega_t.len);
    let mut pt = vec![0.0; nt_];
    let mut pn = vec![0.0; nn];
    for i in 0..nt_ {
        for j in 0..nn {
            let a = spec.values[i * nn + j].norm();
            pt[i] += a;
            pn[j] += a;
        }
    }
    let top2 = |p: &[f64], axis: &Axis| {
        let m = local_maxima(p);
        let mut c: Vec<f64> = m.iter().take(2).map(|&i| axis.value(i)).collect();
        c.sort_by(f64::total_cmp);
        c
    };
    let ct = top2(&pt, &spec.omega_tau);
    let cn = top2(&pn, &spec.omega_t);
    let peak = local_maxima(&pt).first().copied().unwrap_or(nt_ / 2);
    let hw = half_width(&pt, peak, spec.omega_tau.step)
        .unwrap_or(0.1 * (spec.omega_tau.end() - spec.omega_tau.start).max(spec.omega_tau.step));
    let g = (hw / 3f64.sqrt()).max(spec.omega_tau.step);
    match (ct.len(), cn.len()) {
        (2, 2) => (0.5 * (ct[0] + cn[0]), 0.5 * (ct[1] + cn[1]), g, false),
        (2, _) => (ct[0], ct[1], g, false),
        (_, 2) => (cn[0], cn[1], g, false),
        _ => {
            let c = ct.first().copied().unwrap_or(spec.omega_tau.value(peak));
            (c - 0.5 * g, c + 0.5 * g, g, true)
        }
    }
}

/// Separable function Σ_kl coef[k][l] a_k ⊗ b_l over the 4+4 basis
/// (u_α, u_β, u_α², u_β²) ⊗ (v_α, v_β, v_α², v_β²).
type Coef = [[C; 4]; 4];

fn inner(a: &Coef, b: &Coef, ga: &[Vec<C>], gb: &[Vec<C>]) -> C {
    let mut acc = ZERO;
    for k in 0..4 {
        for l in 0..4 {
            if a[k][l] == ZERO {
                continue;
            }
            let mut s = ZERO;
            for k2 in 0..4 {
                for l2 in 0..4 {
                    if b[k2][l2] != ZERO {
                        s += b[k2][l2] * ga[k][k2] * gb[l][l2];
                    }
                }
            }
            acc += a[k][l].conj() * s;
        }
    }
    acc
}

fn inner_data(a: &Coef, q: &[Vec<C>]) -> C {
    let mut acc = ZERO;
    for k in 0..4 {
        for l in 0..4 {
            acc += a[k][l].conj() * q[k][l];
        }
    }
    acc
}

/// p = [W_α, W_β, Γ, Re S_αα, Im S_αα, Re S_αβ, Im S_αβ, Re S_βα, Im S_βα, Re S_ββ, Im S_ββ].
fn amplitudes(p: &[f64]) -> [[C; 2]; 2] {
    std::array::from_fn(|m| std::array::from_fn(|n| C::new(p[3 + 2 * (2 * m + n)], p[4 + 2 * (2 * m + n)])))
}

fn model_and_jacobian(p: &[f64]) -> (Coef, Vec<Coef>) {
    let s = amplitudes(p);
    let mut f = [[ZERO; 4]; 4];
    for m in 0..2 {
        for n in 0..2 {
            f[m][n] = I * s[m][n];
        }
    }
    let mut jac = vec![[[ZERO; 4]; 4]; 11];
    for c in 0..2 {
        for n in 0..2 {
            jac[c][2 + c][n] += -s[c][n];
        }
        for m in 0..2 {
            jac[c][m][2 + c] += s[m][c];
        }
    }
    for m in 0..2 {
        for n in 0..2 {
            jac[2][2 + m][n] += -I * s[m][n];
            jac[2][m][2 + n] += -I * s[m][n];
            let k = 3 + 2 * (2 * m + n);
            jac[k][m][n] = I;
            jac[k + 1][m][n] = C::new(-1.0, 0.0);
        }
    }
    (f, jac)
}

struct Polish<'a> {
    grid: Grid<'a>,
}

impl Polish<'_> {
    fn bases(&self, p: &[f64]) -> (Vec<Vec<C>>, Vec<Vec<C>>) {
        let (ua, ua2) = tau_funcs(&self.grid.wt, p[0], p[2]);
        let (ub, ub2) = tau_funcs(&self.grid.wt, p[1], p[2]);
        let (va, va2) = t_funcs(&self.grid.wn, p[0], p[2]);
        let (vb, vb2) = t_funcs(&self.grid.wn, p[1], p[2]);
        (vec![ua, ub, ua2, ub2], vec![va, vb, va2, vb2])
    }

    /// (cost, gradient, normal matrix) at p; cost = ‖y − f‖².
    fn linearize(&self, p: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let (a, b) = self.bases(p);
        let ar: Vec<&[C]> = a.iter().map(|v| v.as_slice()).collect();
        let br: Vec<&[C]> = b.iter().map(|v| v.as_slice()).collect();
        let ga = gram(&ar);
        let gb = gram(&br);
        let q = project(self.grid.y, self.grid.nt, &self.grid.rows, &self.grid.cols, &ar, &br);
        let (f, jac) = model_and_jacobian(p);
        let ff = inner(&f, &f, &ga, &gb).re;
        let fy = inner_data(&f, &q).re;
        let cost = (self.grid.norm2 - 2.0 * fy + ff).max(0.0);
        let n = jac.len();
        let mut h = DMatrix::zeros(n, n);
        let mut g = DVector::zeros(n);
        for j in 0..n {
            g[j] = (inner_data(&jac[j], &q) - inner(&jac[j], &f, &ga, &gb)).re;
            for k in j..n {
                let v = inner(&jac[j], &jac[k], &ga, &gb).re;
                h[(j, k)] = v;
                h[(k, j)] = v;
            }
        }
        (cost, g, h)
    }

    fn cost(&self, p: &[f64]) -> f64 {
        let (a, b) = self.bases(p);
        let ar: Vec<&[C]> = a[..2].iter().map(|v| v.as_slice()).collect();
        let br: Vec<&[C]> = b[..2].iter().map(|v| v.as_slice()).collect();
        let ga = gram(&[ar[0], ar[1], &a[2], &a[3]]);
        let gb = gram(&[br[0], br[1], &b[2], &b[3]]);
        let q2 = project(self.grid.y, self.grid.nt, &self.grid.rows, &self.grid.cols, &ar, &br);
        let mut q = vec![vec![ZERO; 4]; 4];
        for k in 0..2 {
            for l in 0..2 {
                q[k][l] = q2[k][l];
            }
        }
        let (f, _) = model_and_jacobian(p);
        (self.grid.norm2 - 2.0 * inner_data(&f, &q).re + inner(&f, &f, &ga, &gb).re).max(0.0)
    }

    /// Levenberg–Marquardt refinement; returns the refined parameters.
    fn run(&self, mut p: Vec<f64>, iterations: usize, g_min: f64) -> (Vec<f64>, bool) {
        let mut lambda = 1e-6;
        let mut ok = false;
        let floor = 1e-13 * self.grid.norm2;
        for _ in 0..iterations {
            let (cost, g, h) = self.linearize(&p);
            let mut accepted = false;
            for _ in 0..20 {
                let mut a = h.clone();
                for d in 0..a.nrows() {
                    a[(d, d)] += lambda * h[(d, d)].max(1e-300);
                }
                let Some(ch) = a.cholesky() else {
                    lambda *= 10.0;
                    continue;
                };
                let delta = ch.solve(&g);
                let mut trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(x, d)| x + d).collect();
                trial[2] = trial[2].max(g_min);
                let scaled = delta
                    .iter()
                    .enumerate()
                    .map(|(d, v)| v * v * h[(d, d)])
                    .sum::<f64>();
                let c2 = self.cost(&trial);
                if c2 <= cost + floor {
                    p = trial;
                    lambda = (lambda / 5.0).max(1e-12);
                    accepted = true;
                    if scaled <= 1e-24 * self.grid.norm2.max(1e-300) || cost <= floor {
                        return (p, true);
                    }
                    break;
                }
                lambda *= 8.0;
            }
            if !accepted {
                // no descent direction left at working precision
                ok = true;
                break;
            }
        }
        (p, ok || iterations == 0)
    }
}

/// ‖y − model‖ evaluated point by point on the full grid.
fn explicit_residual(spec: &Spectrum2D, p: &[f64]) -> f64 {
    let (_, wt) = samples(&spec.omega_tau, 1);
    let (_, wn) = samples(&spec.omega_t, 1);
    let (ua, _) = tau_funcs(&wt, p[0], p[2]);
    let (ub, _) = tau_funcs(&wt, p[1], p[2]);
    let (va, _) = t_funcs(&wn, p[0], p[2]);
    let (vb, _) = t_funcs(&wn, p[1], p[2]);
    let s = amplitudes(p);
    let nn = spec.omega_t.len;
    let mut acc = 0.0;
    for i in 0..spec.omega_tau.len {
        let r = [I * (ua[i] * s[0][0] + ub[i] * s[1][0]), I * (ua[i] * s[0][1] + ub[i] * s[1][1])];
        for j in 0..nn {
            acc += (spec.values[i * nn + j] - r[0] * va[j] - r[1] * vb[j]).norm_sqr();
        }
    }
    acc.sqrt()
}

pub fn fit_peaks(spec: &Spectrum2D, hint: Option<&FitHint>) -> Result<PeakFitResult> {
    fit_peaks_with(spec, hint, &FitOptions::default())
}

pub fn fit_peaks_with(spec: &Spectrum2D, hint: Option<&FitHint>, opts: &FitOptions) -> Result<PeakFitResult> {
    let (ta, na) = (&spec.omega_tau, &spec.omega_t);
    if spec.values.len() != ta.len * na.len {
        return Err(Error::InvalidInput(format!(
            "spectrum holds {} values for a {}x{} grid",
            spec.values.len(),
            ta.len,
            na.len
        )));
    }
    if ta.len < 3 || na.len < 3 {
        return Err(Error::InvalidInput("spectrum grid needs at least 3 points per axis".into()));
    }
    if spec.values.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidInput("spectrum contains non-finite values".into()));
    }
    let mut warnings = Vec::new();
    let full = Grid::new(spec, 1, 1);
    let to_cm_width = |g: f64| angular_to_wavenumber(g);

    if full.norm2 == 0.0 {
        let (a, b, g) = match hint {
            Some(h) => (h.omega_alpha, h.omega_beta, h.gamma.unwrap_or(wavenumber_to_angular(ta.step))),
            None => {
                warnings.push("empty spectrum without a hint; centers set to the axis midpoint".into());
                let c = 0.5 * (ta.start + ta.end());
                (c, c, wavenumber_to_angular(ta.step))
            }
        };
        return Ok(PeakFitResult {
            waiting_time: spec.waiting_time,
            config: spec.config.clone(),
            omega_alpha_g: a,
            omega_beta_g: b,
            gamma: g,
            s: [[ZERO; 2]; 2],
            residual_norm: 0.0,
            relative_residual: 0.0,
            converged: true,
            evaluations: 0,
            warnings,
        });
    }

    let (mut a0, mut b0, mut g0, merged) = initial_guess(spec);
    if merged {
        warnings.push("only one resonance visible in the marginal profiles".into());
    }
    if let Some(h) = hint {
        a0 = h.omega_alpha;
        b0 = h.omega_beta;
        if let Some(g) = h.gamma {
            g0 = to_cm_width(g);
        }
    }

    // simplex stage in cm⁻¹ on a thinned grid
    let stride = |len: usize| len.div_ceil(opts.coarse_points.max(3)).max(1);
    let coarse = Grid::new(spec, stride(ta.len), stride(na.len));
    let lo_c = ta.start.max(na.start);
    let hi_c = ta.end().min(na.end());
    let (lo_c, hi_c) = if lo_c < hi_c { (lo_c, hi_c) } else { (ta.start, ta.end()) };
    let step_max = ta.step.max(na.step);
    let g_lo = 0.25 * step_max;
    let g_hi = (hi_c - lo_c).max(step_max);
    let lo = [lo_c, lo_c, g_lo];
    let hi = [hi_c, hi_c, g_hi];
    let objective = |x: &[f64]| {
        if coarse.norm2 == 0.0 {
            return 0.0;
        }
        coarse
            .projected(
                wavenumber_to_angular(x[0]),
                wavenumber_to_angular(x[1]),
                wavenumber_to_angular(x[2]),
            )
            .0
    };
    let jitter = [(0.0, 0.0, 1.0), (-0.5, 0.5, 1.5), (0.5, -0.5, 0.7)];
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    let mut evaluations = 0;
    for r in 0..opts.restarts.max(1) {
        let (da, db, sg) = jitter[r % jitter.len()];
        let x0 = [a0 + da * g0, b0 + db * g0, g0 * sg];
        let res = minimize(objective, &x0, &[g0, g0, 0.3 * g0], &lo, &hi, &opts.simplex);
        evaluations += res.evals;
        if best.as_ref().is_none_or(|b| res.f < b.1) {
            best = Some((res.x, res.f, res.converged));
        }
    }
    let (x, _, nm_converged) = best.expect("at least one restart");
    if !nm_converged {
        warnings.push(format!("simplex search hit its budget of {} evaluations", opts.simplex.max_evals));
    }
    let (mut wa, mut wb) = (wavenumber_to_angular(x[0]), wavenumber_to_angular(x[1]));
    let g = wavenumber_to_angular(x[2]);
    let (_, mut s) = full.projected(wa, wb, g);
    if wa > wb {
        std::mem::swap(&mut wa, &mut wb);
        s = [[s[1][1], s[1][0]], [s[0][1], s[0][0]]];
    }
    let mut p = vec![wa, wb, g];
    for row in &s {
        for z in row {
            p.push(z.re);
            p.push(z.im);
        }
    }

    let polish = Polish { grid: full };
    let (mut p, polished) = polish.run(p, opts.polish_iterations, wavenumber_to_angular(g_lo));
    if !polished {
        warnings.push("Gauss-Newton refinement did not settle".into());
    }
    if p[0] > p[1] {
        p.swap(0, 1);
        let s = amplitudes(&p);
        let swapped = [[s[1][1], s[1][0]], [s[0][1], s[0][0]]];
        for m in 0..2 {
            for n in 0..2 {
                p[3 + 2 * (2 * m + n)] = swapped[m][n].re;
                p[4 + 2 * (2 * m + n)] = swapped[m][n].im;
            }
        }
    }
    let omega_alpha_g = angular_to_wavenumber(p[0]);
    let omega_beta_g = angular_to_wavenumber(p[1]);
    let gamma_cm = to_cm_width(p[2]);
    if omega_beta_g - omega_alpha_g < gamma_cm {
        warnings.push(format!(
            "resonances {omega_alpha_g:.2} and {omega_beta_g:.2} cm^-1 are closer than the width {gamma_cm:.2} cm^-1; amplitudes are poorly separated"
        ));
    }
    for (name, c) in [("alpha", omega_alpha_g), ("beta", omega_beta_g)] {
        if !ta.brackets(c) || !na.brackets(c) {
            warnings.push(format!("fitted {name} center {c:.2} cm^-1 lies outside the grid"));
        }
    }
    let residual_norm = explicit_residual(spec, &p);
    let relative_residual = residual_norm / polish.grid.norm2.sqrt();
    Ok(PeakFitResult {
        waiting_time: spec.waiting_time,
        config: spec.config.clone(),
        omega_alpha_g,
        omega_beta_g,
        gamma: p[2],
        s: amplitudes(&p),
        residual_norm,
        relative_residual,
        converged: nm_converged && polished,
        evaluations,
        warnings,
    })
}

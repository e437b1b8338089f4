//! Nelder–Mead simplex search with box constraints enforced by clamping.

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_evals: usize,
    /// Stop when the spread of objective values drops below `f_rel·|f_best| + f_abs`.
    pub f_rel: f64,
    pub f_abs: f64,
    /// Stop when every vertex lies within this distance of the best one (per coordinate).
    pub x_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_evals: 2000,
            f_rel: 1e-10,
            f_abs: 1e-14,
            x_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

fn clamp(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, &l), &h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(l, h);
    }
}

/// Minimizes `f` from `x0` with initial edge lengths `step`, keeping iterates inside `[lo, hi]`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut start = x0.to_vec();
    clamp(&mut start, lo, hi);
    let mut pts = vec![start.clone()];
    for i in 0..n {
        let mut p = start.clone();
        p[i] += step[i];
        if p[i] > hi[i] {
            p[i] = start[i] - step[i];
        }
        clamp(&mut p, lo, hi);
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let diam = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.f_rel * vals[0].abs() + opts.f_abs || diam <= opts.x_tol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| {
            let mut p: Vec<f64> = centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (c - w)).collect();
            clamp(&mut p, lo, hi);
            p
        };

        let xr = along(alpha);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(gamma);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(rho * alpha);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        let best = pts[0].clone();
        for i in 1..=n {
            for (v, b) in pts[i].iter_mut().zip(&best) {
                *v = b + sigma * (*v - b);
            }
            vals[i] = eval(&pts[i], &mut evals);
        }
    }
    let k = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    SimplexResult {
        x: pts[k].clone(),
        f: vals[k],
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.5, 0.5],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            &SimplexOptions { max_evals: 5000, ..Default::default() },
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3, "{:?}", r.x);
    }

    #[test]
    fn respects_bounds() {
        let r = minimize(
            |x| (x[0] + 3.0).powi(2) + (x[1] - 0.2).powi(2),
            &[0.5, 0.5],
            &[0.3, 0.3],
            &[0.0, 0.0],
            &[1.0, 1.0],
            &SimplexOptions::default(),
        );
        assert!(r.x[0].abs() < 1e-6 && (r.x[1] - 0.2).abs() < 1e-4, "{:?}", r.x);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let r = minimize(
            |x| x.iter().map(|v| v * v).sum(),
            &[3.0, 3.0, 3.0],
            &[1.0; 3],
            &[-10.0; 3],
            &[10.0; 3],
            &SimplexOptions { max_evals: 10, ..Default::default() },
        );
        assert!(!r.converged);
        assert!(r.evals <= 12);
    }
}

use super::amplitudes::{Exciton, PeakAmplitudeSet};
use super::dephasing::DephasingSet;
use crate::error::{Error, Result};
use crate::exciton::EigenDimer;
use crate::units::wavenumber_to_angular;
use num_complex::Complex64;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// Uniform frequency axis in cm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || len == 0 || !start.is_finite() {
            return Err(Error::InvalidInput(format!(
                "axis needs positive spacing and at least one point (start {start}, step {step}, len {len})"
            )));
        }
        Ok(Axis { start, step, len })
    }

    /// Grid from `lo` to `lo + span` inclusive.
    pub fn spanning(lo: f64, span: f64, step: f64) -> Result<Self> {
        let n = (span / step).round() as usize + 1;
        Self::new(lo, step, n)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.value(i)).collect()
    }

    pub fn end(&self) -> f64 {
        self.value(self.len - 1)
    }

    pub fn brackets(&self, x: f64) -> bool {
        self.start <= x && x <= self.end()
    }
}

/// Complex 2D spectrum at one waiting time; `values[i * omega_t.len + j]` sits at
/// (omega_tau[i], omega_t[j]).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    pub omega_tau: Axis,
    pub omega_t: Axis,
    pub values: Vec<Complex64>,
    pub waiting_time: f64,
    pub config: String,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct Sidecar {
    waiting_time_fs: f64,
    config: String,
    omega_tau: Axis,
    omega_t: Axis,
    units: String,
}

impl Spectrum2D {
    pub fn zeros(omega_tau: Axis, omega_t: Axis, waiting_time: f64, config: &str) -> Self {
        Spectrum2D {
            omega_tau,
            omega_t,
            values: vec![Complex64::new(0.0, 0.0); omega_tau.len * omega_t.len],
            waiting_time,
            config: config.to_string(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.omega_t.len + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Grid indices of the largest |value|.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0.0);
        for (k, z) in self.values.iter().enumerate() {
            let v = z.norm_sqr();
            if v > best.1 {
                best = (k, v);
            }
        }
        (best.0 / self.omega_t.len, best.0 % self.omega_t.len)
    }

    /// Writes `<stem>.csv` (long form) and `<stem>.json` (axes and labels).
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        let file = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "omega_tau,omega_t,re,im")?;
        let t_values = self.omega_t.values();
        for i in 0..self.omega_tau.len {
            let wt = self.omega_tau.value(i);
            for (j, wj) in t_values.iter().enumerate() {
                let z = self.at(i, j);
                writeln!(w, "{wt:e},{wj:e},{:e},{:e}", z.re, z.im)?;
            }
        }
        w.flush()?;
        let side = Sidecar {
            waiting_time_fs: self.waiting_time,
            config: self.config.clone(),
            omega_tau: self.omega_tau,
            omega_t: self.omega_t,
            units: "cm^-1 axes; values in fs^2 (amplitude units)".into(),
        };
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    /// Reads a pair written by [`Spectrum2D::write`]; the CSV grid must match the sidecar axes.
    pub fn read(dir: &Path, stem: &str) -> Result<Self> {
        let json_path = dir.join(format!("{stem}.json"));
        let csv_path = dir.join(format!("{stem}.csv"));
        let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(&json_path)?)?;
        let bad = |msg: String| Error::Parse {
            file: csv_path.display().to_string(),
            msg,
        };
        let (nt, nw) = (side.omega_tau.len, side.omega_t.len);
        let mut values = Vec::with_capacity(nt * nw);
        let reader = std::io::BufReader::new(std::fs::File::open(&csv_path)?);
        let tol = 1e-9 * (side.omega_tau.step.min(side.omega_t.step));
        for (line_no, line) in reader.lines().enumerate() {
            let line = line?;
            if line_no == 0 {
                if line.trim() != "omega_tau,omega_t,re,im" {
                    return Err(bad("unexpected header".into()));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',').map(|x| x.trim().parse::<f64>());
            let mut next = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| bad(format!("line {}: too few fields", line_no + 1)))?
                    .map_err(|e| bad(format!("line {}: {e}", line_no + 1)))
            };
            let (wt, wj, re, im) = (next()?, next()?, next()?, next()?);
            let k = values.len();
            if k >= nt * nw {
                return Err(bad("more rows than the sidecar axes allow".into()));
            }
            let (i, j) = (k / nw, k % nw);
            if (wt - side.omega_tau.value(i)).abs() > tol.max(1e-9 * wt.abs())
                || (wj - side.omega_t.value(j)).abs() > tol.max(1e-9 * wj.abs())
            {
                return Err(bad(format!("line {}: grid point does not match sidecar axes", line_no + 1)));
            }
            values.push(Complex64::new(re, im));
        }
        if values.len() != nt * nw {
            return Err(bad(format!("expected {} rows, found {}", nt * nw, values.len())));
        }
        Ok(Spectrum2D {
            omega_tau: side.omega_tau,
            omega_t: side.omega_t,
            values,
            waiting_time: side.waiting_time_fs,
            config: side.config,
        })
    }
}

/// l_τ,m(ω) = 1/(i(ω − ω_mg − iΓ)) on `axis`, angular units.
pub(crate) fn tau_lineshape(axis: &Axis, center: f64, gamma: f64) -> Vec<Complex64> {
    let w0 = wavenumber_to_angular(center);
    (0..axis.len)
        .map(|i| {
            let w = wavenumber_to_angular(axis.value(i));
            Complex64::new(gamma, w - w0).inv()
        })
        .collect()
}

/// l_t,n(ω) = 1/(i(−ω + ω_ng − iΓ)) on `axis`.
pub(crate) fn t_lineshape(axis: &Axis, center: f64, gamma: f64) -> Vec<Complex64> {
    let w0 = wavenumber_to_angular(center);
    (0..axis.len)
        .map(|i| {
            let w = wavenumber_to_angular(axis.value(i));
            Complex64::new(gamma, w0 - w).inv()
        })
        .collect()
}

/// S(ω_τ, T, ω_t) = i Σ l_τ,m l_t,n S_mn at waiting-time index `k`.
pub fn assemble_spectrum(
    peaks: &PeakAmplitudeSet,
    k: usize,
    eigen: &EigenDimer,
    deph: &DephasingSet,
    omega_tau: Axis,
    omega_t: Axis,
) -> Spectrum2D {
    let gammas = [deph.alpha_g, deph.beta_g];
    let lt: Vec<Vec<Complex64>> = Exciton::BOTH
        .iter()
        .map(|m| tau_lineshape(&omega_tau, m.energy(eigen), gammas[m.index()]))
        .collect();
    let ln: Vec<Vec<Complex64>> = Exciton::BOTH
        .iter()
        .map(|n| t_lineshape(&omega_t, n.energy(eigen), gammas[n.index()]))
        .collect();
    let s = &peaks.values[k];
    let i_unit = Complex64::new(0.0, 1.0);
    let mut out = Spectrum2D::zeros(omega_tau, omega_t, peaks.times[k], &peaks.config);
    for i in 0..omega_tau.len {
        let row: [Complex64; 2] =
            std::array::from_fn(|n| i_unit * (lt[0][i] * s[0][n] + lt[1][i] * s[1][n]));
        let dst = &mut out.values[i * omega_t.len..(i + 1) * omega_t.len];
        for (j, v) in dst.iter_mut().enumerate() {
            *v = row[0] * ln[0][j] + row[1] * ln[1][j];
        }
    }
    out
}

/// Warnings for resonances that fall outside either axis.
pub fn bracket_warnings(eigen: &EigenDimer, omega_tau: &Axis, omega_t: &Axis) -> Vec<String> {
    let mut w = Vec::new();
    for x in Exciton::BOTH {
        let e = x.energy(eigen);
        for (name, axis) in [("omega_tau", omega_tau), ("omega_t", omega_t)] {
            if !axis.brackets(e) {
                w.push(format!(
                    "{name} axis [{}, {}] does not contain the resonance at {e} cm^-1",
                    axis.start,
                    axis.end()
                ));
            }
        }
    }
    w
}

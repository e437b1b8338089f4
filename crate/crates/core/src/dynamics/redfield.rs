use super::process::{Level, ProcessMatrix, COLUMNS};
use crate::error::{Error, Result};
use crate::exciton::EigenDimer;
use crate::units::{boltzmann_factor, wavenumber_to_angular};
use num_complex::Complex64;

/// Relative tolerance on the uphill/downhill rate ratio.
pub const DETAILED_BALANCE_TOL: f64 = 1e-6;

/// Nonzero entries of the secular Redfield tensor, fs⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RedfieldRates {
    /// R_ββαα: transfer α → β.
    pub uphill: f64,
    /// R_ααββ: transfer β → α.
    pub downhill: f64,
    /// R_αβαβ = R_βαβα.
    pub coherence: f64,
    pub alpha_g: f64,
    pub beta_g: f64,
    pub f_alpha: f64,
    pub f_beta: f64,
    pub f_g: f64,
}

impl RedfieldRates {
    /// Porphyrin dimer values, with the downhill rate completed from the uphill one.
    pub fn porphyrin(gap: f64, temperature: f64) -> Self {
        let uphill = 8.02e-4;
        RedfieldRates {
            uphill,
            downhill: uphill / boltzmann_factor(gap, temperature),
            coherence: 2.93e-3,
            alpha_g: 1.23e-2,
            beta_g: 1.45e-2,
            f_alpha: 1.23e-2,
            f_beta: 1.45e-2,
            f_g: 4.77e-2,
        }
    }

    pub fn zero() -> Self {
        RedfieldRates {
            uphill: 0.0,
            downhill: 0.0,
            coherence: 0.0,
            alpha_g: 0.0,
            beta_g: 0.0,
            f_alpha: 0.0,
            f_beta: 0.0,
            f_g: 0.0,
        }
    }

    fn all(&self) -> [f64; 8] {
        [
            self.uphill,
            self.downhill,
            self.coherence,
            self.alpha_g,
            self.beta_g,
            self.f_alpha,
            self.f_beta,
            self.f_g,
        ]
    }
}

/// Ohmic bath parameters, carried along for the record only.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OhmicBath {
    pub reorganization: f64,
    pub cutoff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedfieldModel {
    pub rates: RedfieldRates,
    /// Kelvin.
    pub temperature: f64,
    /// ω_β − ω_α in cm⁻¹ (positive).
    pub gap: f64,
    /// Uniform decay of the single-exciton block into the ground state, fs⁻¹.
    pub radiative: f64,
    pub bath: Option<OhmicBath>,
}

impl RedfieldModel {
    pub fn new(rates: RedfieldRates, temperature: f64, gap: f64) -> Result<Self> {
        let m = RedfieldModel {
            rates,
            temperature,
            gap,
            radiative: 0.0,
            bath: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_radiative(mut self, rate: f64) -> Result<Self> {
        self.radiative = rate;
        self.validate()?;
        Ok(self)
    }

    /// Table of rates for the porphyrin dimer at 273 K.
    pub fn porphyrin(gap: f64) -> Self {
        let temperature = 273.0;
        RedfieldModel {
            rates: RedfieldRates::porphyrin(gap, temperature),
            temperature,
            gap,
            radiative: 0.0,
            bath: Some(OhmicBath {
                reorganization: 100.0,
                cutoff: 150.0,
            }),
        }
    }

    /// Expected R_ααββ / R_ββαα.
    pub fn boltzmann_ratio(&self) -> f64 {
        1.0 / boltzmann_factor(self.gap, self.temperature)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rates.all().iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidInput("Redfield rates must be finite and nonnegative".into()));
        }
        if !(self.radiative >= 0.0) {
            return Err(Error::InvalidInput("radiative rate must be nonnegative".into()));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::InvalidInput("temperature must be positive".into()));
        }
        let (up, down) = (self.rates.uphill, self.rates.downhill);
        if up == 0.0 && down == 0.0 {
            return Ok(());
        }
        let expected = self.boltzmann_ratio();
        let ratio = down / up;
        let rel = ((ratio - expected) / expected).abs();
        if !(rel <= DETAILED_BALANCE_TOL) {
            return Err(Error::DetailedBalance { ratio, expected, rel });
        }
        Ok(())
    }

    /// Equilibrium population of α under the two-state kinetics.
    pub fn equilibrium_alpha(&self) -> f64 {
        let k = self.rates.uphill + self.rates.downhill;
        if k == 0.0 {
            0.5
        } else {
            self.rates.downhill / k
        }
    }

    /// Generator on (gg, αα, ββ, αβ, βα) with the coherence frequency in rad/fs.
    pub fn generator(&self, omega_alpha_beta: f64) -> [[Complex64; 5]; 5] {
        let z = Complex64::new(0.0, 0.0);
        let re = |x: f64| Complex64::new(x, 0.0);
        let (up, down, g) = (self.rates.uphill, self.rates.downhill, self.radiative);
        let mut l = [[z; 5]; 5];
        l[0][1] = re(g);
        l[0][2] = re(g);
        l[1][1] = re(-up - g);
        l[1][2] = re(down);
        l[2][1] = re(up);
        l[2][2] = re(-down - g);
        let damp = self.rates.coherence + g;
        l[3][3] = Complex64::new(-damp, -omega_alpha_beta);
        l[4][4] = Complex64::new(-damp, omega_alpha_beta);
        l
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidInput("waiting times must be nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("waiting times must be sorted".into()));
    }
    Ok(())
}

fn check_gap(model: &RedfieldModel, eigen: &EigenDimer) -> Result<f64> {
    let gap = eigen.omega_beta - eigen.omega_alpha;
    if (gap - model.gap).abs() > 1e-6 * gap.abs().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "model gap {} cm^-1 does not match the eigenbasis gap {gap} cm^-1",
            model.gap
        )));
    }
    Ok(wavenumber_to_angular(eigen.omega_alpha_beta()))
}

/// χ(T) of the secular model in closed form.
pub fn propagate_chi(model: &RedfieldModel, eigen: &EigenDimer, times: &[f64]) -> Result<ProcessMatrix> {
    model.validate()?;
    check_times(times)?;
    let w_ab = check_gap(model, eigen)?;
    use Level::{Alpha as A, Beta as B, G};
    let k = model.rates.uphill + model.rates.downhill;
    let p_a = model.equilibrium_alpha();
    let p_b = 1.0 - p_a;
    let mut chi = ProcessMatrix::zeros(times.to_vec());
    let re = |x: f64| Complex64::new(x, 0.0);
    for (i, &t) in times.iter().enumerate() {
        let relax = (-k * t).exp();
        let keep = (-model.radiative * t).exp();
        chi.set(i, G, G, G, G, re(1.0));
        chi.set(i, A, A, A, A, re(keep * (p_a + p_b * relax)));
        chi.set(i, B, B, A, A, re(keep * p_b * (1.0 - relax)));
        chi.set(i, G, G, A, A, re(1.0 - keep));
        chi.set(i, B, B, B, B, re(keep * (p_b + p_a * relax)));
        chi.set(i, A, A, B, B, re(keep * p_a * (1.0 - relax)));
        chi.set(i, G, G, B, B, re(1.0 - keep));
        let coh = Complex64::from_polar(keep * (-model.rates.coherence * t).exp(), -w_ab * t);
        chi.set(i, A, B, A, B, coh);
        chi.set(i, B, A, B, A, coh.conj());
    }
    Ok(chi)
}

/// χ(T) by fixed-step RK4 integration of the same equation of motion.
pub fn propagate_chi_rk4(
    model: &RedfieldModel,
    eigen: &EigenDimer,
    times: &[f64],
    max_step: f64,
) -> Result<ProcessMatrix> {
    model.validate()?;
    check_times(times)?;
    if !(max_step > 0.0) {
        return Err(Error::InvalidInput("integration step must be positive".into()));
    }
    let l = model.generator(check_gap(model, eigen)?);
    let apply = |x: &[Complex64; 5]| {
        let mut y = [Complex64::new(0.0, 0.0); 5];
        for (r, yr) in y.iter_mut().enumerate() {
            for c in 0..5 {
                *yr += l[r][c] * x[c];
            }
        }
        y
    };
    let mut chi = ProcessMatrix::zeros(times.to_vec());
    for (col, &(c, d)) in COLUMNS.iter().enumerate() {
        let mut x = [Complex64::new(0.0, 0.0); 5];
        x[col] = Complex64::new(1.0, 0.0);
        let mut now = 0.0;
        for (i, &t) in times.iter().enumerate() {
            let span = t - now;
            let n = (span / max_step).ceil() as usize;
            if n > 0 {
                let h = span / n as f64;
                for _ in 0..n {
                    let k1 = apply(&x);
                    let k2 = apply(&std::array::from_fn(|j| x[j] + k1[j] * (0.5 * h)));
                    let k3 = apply(&std::array::from_fn(|j| x[j] + k2[j] * (0.5 * h)));
                    let k4 = apply(&std::array::from_fn(|j| x[j] + k3[j] * h));
                    for j in 0..5 {
                        x[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
                    }
                }
            }
            now = t;
            for (j, &(a, b)) in COLUMNS.iter().enumerate() {
                chi.set(i, a, b, c, d, x[j]);
            }
        }
    }
    Ok(chi)
}

/// The tabulated closed forms of the porphyrin example, evaluated literally.
///
/// The table lists χ_ββαα twice; the second line (1 − e^{−R_ββαα T}) is read as χ_ββββ.
/// Population columns do not reduce to the identity at T = 0.
pub fn analytic_chi_table4(model: &RedfieldModel, times: &[f64]) -> ProcessMatrix {
    use Level::{Alpha as A, Beta as B, G};
    let w_ab = -wavenumber_to_angular(model.gap);
    let (up, down) = (model.rates.uphill, model.rates.downhill);
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut chi = ProcessMatrix::zeros(times.to_vec());
    for (i, &t) in times.iter().enumerate() {
        chi.set(i, G, G, G, G, re(1.0));
        chi.set(i, A, A, A, A, re(1.0 - (-up * t).exp()));
        chi.set(i, B, B, A, A, re((-up * t).exp()));
        chi.set(i, A, A, B, B, re((-down * t).exp()));
        chi.set(i, B, B, B, B, re(1.0 - (-up * t).exp()));
        let coh = Complex64::from_polar((-model.rates.coherence * t).exp(), -w_ab * t);
        chi.set(i, A, B, A, B, coh);
        chi.set(i, B, A, B, A, coh.conj());
    }
    chi
}

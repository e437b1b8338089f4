use super::amplitudes::{Exciton, PulseSequence};
use super::dephasing::{coherence_propagator, State};
use super::isotropic::{Averaging, PolarizationConfig};
use super::pathways::{pathway_terms, Echo};
use super::spectrum::{Axis, Spectrum2D};
use crate::dynamics::ProcessMatrix;
use crate::error::{Error, Result};
use crate::exciton::EigenDimer;
use crate::units::wavenumber_to_angular;
use num_complex::Complex64;

/// Uniform time grid starting at zero, fs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || len == 0 {
            return Err(Error::InvalidInput("time grid needs positive step and length".into()));
        }
        Ok(TimeGrid { step, len })
    }

    /// Grid covering at least `span` fs.
    pub fn covering(span: f64, step: f64) -> Result<Self> {
        Self::new(step, (span / step).ceil() as usize + 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.step * i as f64).collect()
    }
}

fn exciton_state(x: Exciton) -> State {
    match x {
        Exciton::Alpha => State::Alpha,
        Exciton::Beta => State::Beta,
    }
}

fn echo_states(e: Echo) -> (State, State) {
    match e {
        Echo::AlphaG => (State::Alpha, State::G),
        Echo::BetaG => (State::Beta, State::G),
        Echo::FAlpha => (State::F, State::Alpha),
        Echo::FBeta => (State::F, State::Beta),
    }
}

/// Rephasing polarization P(τ, T_k, t) on the grid `tau` × `t` (τ-major).
///
/// Carries the same −i prefactor as the peak amplitudes, so its one-sided transform
/// reproduces [`super::assemble_spectrum`].
#[allow(clippy::too_many_arguments)]
pub fn polarization_time_domain(
    chi: &ProcessMatrix,
    k: usize,
    eigen: &EigenDimer,
    pulses: &PulseSequence,
    config: &PolarizationConfig,
    averaging: Averaging,
    tau: &[f64],
    t: &[f64],
) -> Result<Vec<Complex64>> {
    let deph = &pulses.dephasing;
    let mut amp = [[Complex64::new(0.0, 0.0); 4]; 2];
    for term in pathway_terms(eigen, pulses, config, averaging) {
        let (a, b, c, d) = term.chi;
        amp[term.p.index()][term.echo.index()] += term.coefficient * chi.entry(k, a, b, c, d)?;
    }
    let mut echo_sum = vec![[Complex64::new(0.0, 0.0); 2]; t.len()];
    for (j, &tj) in t.iter().enumerate() {
        for e in Echo::ALL {
            let (i1, i2) = echo_states(e);
            let h = coherence_propagator(i1, i2, tj, deph, eigen)?;
            for p in 0..2 {
                echo_sum[j][p] += amp[p][e.index()] * h;
            }
        }
    }
    let mut out = Vec::with_capacity(tau.len() * t.len());
    for &ti in tau {
        let g: [Complex64; 2] = [
            coherence_propagator(State::G, exciton_state(Exciton::Alpha), ti, deph, eigen)?,
            coherence_propagator(State::G, exciton_state(Exciton::Beta), ti, deph, eigen)?,
        ];
        out.extend(echo_sum.iter().map(|b| g[0] * b[0] + g[1] * b[1]));
    }
    Ok(out)
}

/// i ∫∫ e^{−iω_τ τ} e^{iω_t t} P dτ dt by left Riemann sums over the grids.
pub fn one_sided_ft(
    values: &[Complex64],
    tau: TimeGrid,
    t: TimeGrid,
    omega_tau: Axis,
    omega_t: Axis,
    waiting_time: f64,
    config: &str,
) -> Result<Spectrum2D> {
    if values.len() != tau.len * t.len {
        return Err(Error::InvalidInput("polarization grid does not match the time grids".into()));
    }
    let t_vals = t.values();
    let kernel_t: Vec<Vec<Complex64>> = (0..omega_t.len)
        .map(|j| {
            let w = wavenumber_to_angular(omega_t.value(j));
            t_vals.iter().map(|&x| Complex64::from_polar(1.0, w * x)).collect()
        })
        .collect();
    let mut partial = vec![Complex64::new(0.0, 0.0); tau.len * omega_t.len];
    for a in 0..tau.len {
        let row = &values[a * t.len..(a + 1) * t.len];
        for j in 0..omega_t.len {
            partial[a * omega_t.len + j] =
                row.iter().zip(&kernel_t[j]).map(|(p, e)| p * e).sum();
        }
    }
    let scale = Complex64::new(0.0, tau.step * t.step);
    let tau_vals = tau.values();
    let mut out = Spectrum2D::zeros(omega_tau, omega_t, waiting_time, config);
    for i in 0..omega_tau.len {
        let w = wavenumber_to_angular(omega_tau.value(i));
        let mut acc = vec![Complex64::new(0.0, 0.0); omega_t.len];
        for (a, &x) in tau_vals.iter().enumerate() {
            let e = Complex64::from_polar(1.0, -w * x);
            for (j, v) in acc.iter_mut().enumerate() {
                *v += e * partial[a * omega_t.len + j];
            }
        }
        for (j, v) in acc.into_iter().enumerate() {
            out.values[i * omega_t.len + j] = scale * v;
        }
    }
    Ok(out)
}

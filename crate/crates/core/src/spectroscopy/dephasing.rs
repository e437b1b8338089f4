use crate::error::{Error, Result};
use crate::exciton::EigenDimer;
use crate::units::wavenumber_to_angular;
use num_complex::Complex64;

/// Free-induction dephasing rates Γ (fs⁻¹) of the optical coherences.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DephasingSet {
    pub alpha_g: f64,
    pub beta_g: f64,
    pub f_alpha: f64,
    pub f_beta: f64,
}

impl DephasingSet {
    pub fn uniform(gamma: f64) -> Self {
        DephasingSet {
            alpha_g: gamma,
            beta_g: gamma,
            f_alpha: gamma,
            f_beta: gamma,
        }
    }

    /// All four rates set to the mean of the two ground-exciton rates.
    pub fn mean_of(alpha_g: f64, beta_g: f64) -> Self {
        Self::uniform(0.5 * (alpha_g + beta_g))
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha_g, self.beta_g, self.f_alpha, self.f_beta];
        if all.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidInput("dephasing rates must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Electronic states entering the optical coherences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum State {
    G,
    Alpha,
    Beta,
    F,
}

impl State {
    fn energy(self, eigen: &EigenDimer) -> f64 {
        match self {
            State::G => 0.0,
            State::Alpha => eigen.omega_alpha,
            State::Beta => eigen.omega_beta,
            State::F => eigen.omega_f,
        }
    }

    fn from_label(c: char) -> Option<State> {
        match c {
            'g' => Some(State::G),
            'a' => Some(State::Alpha),
            'b' => Some(State::Beta),
            'f' => Some(State::F),
            _ => None,
        }
    }
}

fn rate(i: State, j: State, deph: &DephasingSet) -> Option<f64> {
    use State::*;
    match (i, j) {
        (Alpha, G) | (G, Alpha) => Some(deph.alpha_g),
        (Beta, G) | (G, Beta) => Some(deph.beta_g),
        (F, Alpha) | (Alpha, F) => Some(deph.f_alpha),
        (F, Beta) | (Beta, F) => Some(deph.f_beta),
        _ => None,
    }
}

/// G_ij(τ) = Θ(τ)·exp((−iω_ij − Γ_ij)τ) with Θ(0) = 1.
pub fn coherence_propagator(
    i: State,
    j: State,
    interval: f64,
    deph: &DephasingSet,
    eigen: &EigenDimer,
) -> Result<Complex64> {
    let gamma = rate(i, j, deph).ok_or_else(|| Error::UnknownCoherence(format!("{i:?}{j:?}")))?;
    if interval < 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w = wavenumber_to_angular(i.energy(eigen) - j.energy(eigen));
    Ok(Complex64::new(-gamma * interval, -w * interval).exp())
}

/// Same as [`coherence_propagator`] with a two-letter label such as `"ag"` or `"fb"`.
pub fn coherence_propagator_by_label(
    label: &str,
    interval: f64,
    deph: &DephasingSet,
    eigen: &EigenDimer,
) -> Result<Complex64> {
    let mut chars = label.chars();
    let parsed = match (chars.next(), chars.next(), chars.next()) {
        (Some(a), Some(b), None) => State::from_label(a).zip(State::from_label(b)),
        _ => None,
    };
    let (i, j) = parsed.ok_or_else(|| Error::UnknownCoherence(label.to_string()))?;
    coherence_propagator(i, j, interval, deph, eigen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exciton::{diagonalize, SiteDimer};

    fn eigen() -> EigenDimer {
        diagonalize(&SiteDimer::homodimer(16633.0, 175.0, 1.0, 65f64.to_radians()).unwrap())
    }

    #[test]
    fn zero_interval_is_one() {
        let d = DephasingSet::uniform(0.0134);
        let g = coherence_propagator(State::Alpha, State::G, 0.0, &d, &eigen()).unwrap();
        assert_eq!(g, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn negative_interval_is_zero() {
        let d = DephasingSet::uniform(0.0134);
        let g = coherence_propagator(State::G, State::Beta, -1e-9, &d, &eigen()).unwrap();
        assert_eq!(g, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn pure_phase_without_dephasing() {
        let d = DephasingSet::uniform(0.0);
        for t in [1.0, 33.3, 1234.5] {
            let g = coherence_propagator(State::F, State::Beta, t, &d, &eigen()).unwrap();
            assert!((g.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn porphyrin_decay_at_50_fs() {
        let d = DephasingSet::mean_of(1.23e-2, 1.45e-2);
        assert!((d.alpha_g - 0.0134).abs() < 1e-15);
        let g = coherence_propagator_by_label("ag", 50.0, &d, &eigen()).unwrap();
        assert!((g.norm() - (-0.67f64).exp()).abs() < 1e-14);
        assert!((g.norm() - 0.5117).abs() < 1e-4);
    }

    #[test]
    fn phase_sign() {
        // |α⟩⟨g| rotates as exp(−iω_αg τ); |g⟩⟨α| the opposite way
        let d = DephasingSet::uniform(0.0);
        let e = eigen();
        let t = 0.7;
        let w = wavenumber_to_angular(e.omega_alpha) * t;
        let ag = coherence_propagator(State::Alpha, State::G, t, &d, &e).unwrap();
        let ga = coherence_propagator(State::G, State::Alpha, t, &d, &e).unwrap();
        assert!((ag - Complex64::from_polar(1.0, -w)).norm() < 1e-12);
        assert!((ga - Complex64::from_polar(1.0, w)).norm() < 1e-12);
    }

    #[test]
    fn unknown_labels() {
        let d = DephasingSet::uniform(0.01);
        let e = eigen();
        assert!(matches!(
            coherence_propagator(State::F, State::G, 1.0, &d, &e),
            Err(Error::UnknownCoherence(_))
        ));
        assert!(coherence_propagator_by_label("ab", 1.0, &d, &e).is_err());
        assert!(coherence_propagator_by_label("xg", 1.0, &d, &e).is_err());
        assert!(coherence_propagator_by_label("agg", 1.0, &d, &e).is_err());
    }
}

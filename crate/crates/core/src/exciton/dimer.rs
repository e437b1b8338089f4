use crate::error::{Error, Result};
use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// Two coupled two-level chromophores in the site basis.
///
/// Energies in cm⁻¹. The coupling enters with the sign that places the in-phase
/// combination of the site excitations at `omega_bar - J` when the sites are
/// degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteDimer {
    pub omega_a: f64,
    pub omega_b: f64,
    pub coupling: f64,
    pub d_a: Vec3,
    pub d_b: Vec3,
}

impl SiteDimer {
    pub fn new(omega_a: f64, omega_b: f64, coupling: f64, d_a: Vec3, d_b: Vec3) -> Result<Self> {
        let site = SiteDimer {
            omega_a,
            omega_b,
            coupling,
            d_a,
            d_b,
        };
        site.validate()?;
        Ok(site)
    }

    /// Degenerate sites with equal dipole strength `d` at angle `phi`, both in the xy plane.
    pub fn homodimer(omega: f64, coupling: f64, d: f64, phi: f64) -> Result<Self> {
        let d_a = Vec3::new(d, 0.0, 0.0);
        let d_b = Vec3::new(d * phi.cos(), d * phi.sin(), 0.0);
        Self::new(omega, omega, coupling, d_a, d_b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_a > 0.0 && self.omega_b > 0.0) {
            return Err(Error::InvalidInput(format!(
                "site energies must be positive, got {} and {}",
                self.omega_a, self.omega_b
            )));
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidInput("coupling must be finite".into()));
        }
        if !(self.d_a.norm() > 0.0 && self.d_b.norm() > 0.0) {
            return Err(Error::InvalidInput(
                "both site dipoles must be nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Single-exciton eigenbasis of a [`SiteDimer`]. `alpha` is always the lower state.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDimer {
    pub omega_bar: f64,
    pub delta: f64,
    pub theta: f64,
    pub omega_alpha: f64,
    pub omega_beta: f64,
    pub omega_f: f64,
    pub mu_alpha_g: Vec3,
    pub mu_beta_g: Vec3,
    pub mu_f_alpha: Vec3,
    pub mu_f_beta: Vec3,
    pub phi: f64,
}

impl EigenDimer {
    pub fn omega_alpha_g(&self) -> f64 {
        self.omega_alpha
    }

    pub fn omega_beta_g(&self) -> f64 {
        self.omega_beta
    }

    /// ω_f − ω_α, which is ω_β since the biexciton carries no binding energy.
    pub fn omega_f_alpha(&self) -> f64 {
        self.omega_beta
    }

    /// ω_f − ω_β, which is ω_α.
    pub fn omega_f_beta(&self) -> f64 {
        self.omega_alpha
    }

    /// ω_α − ω_β in cm⁻¹ (negative).
    pub fn omega_alpha_beta(&self) -> f64 {
        self.omega_alpha - self.omega_beta
    }

    pub fn is_homodimer(&self, tol: f64) -> bool {
        self.delta.abs() <= tol && self.mu_alpha_g.dot(&self.mu_beta_g).abs() <= tol
    }
}

pub fn diagonalize(site: &SiteDimer) -> EigenDimer {
    let omega_bar = 0.5 * (site.omega_a + site.omega_b);
    let delta = 0.5 * (site.omega_a - site.omega_b);
    // `+ 0.0` turns -0.0 into +0.0 so the uncoupled degenerate case keeps theta = 0.
    let theta = 0.5 * site.coupling.atan2(-delta + 0.0);
    let split = site.coupling.hypot(delta);
    let omega_alpha = omega_bar - split;
    let omega_beta = omega_bar + split;
    let (s, c) = theta.sin_cos();
    let (da, db) = (&site.d_a, &site.d_b);
    let cos_phi = (da.dot(db) / (da.norm() * db.norm())).clamp(-1.0, 1.0);
    EigenDimer {
        omega_bar,
        delta,
        theta,
        omega_alpha,
        omega_beta,
        omega_f: omega_alpha + omega_beta,
        mu_alpha_g: da * c + db * s,
        mu_beta_g: -da * s + db * c,
        mu_f_alpha: da * s + db * c,
        mu_f_beta: da * c - db * s,
        phi: cos_phi.acos(),
    }
}

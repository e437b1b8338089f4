//! TOML run configuration. Every field has a porphyrin-dimer default.

use crate::dynamics::{OhmicBath, RedfieldModel, RedfieldRates};
use crate::error::{Error, Result};
use crate::exciton::{diagonalize, EigenDimer, PulseSpec, SiteDimer, Vec3};
use crate::spectroscopy::{Axis, DephasingSet, PolarizationConfig, PulseSequence, TimeGrid};
use crate::units::{boltzmann_factor, sigma_from_fwhm};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Half period of the α/β population beating in the porphyrin example, fs.
pub const T_C: f64 = 47.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimerSection {
    /// Site energies, cm⁻¹.
    pub omega_a: f64,
    pub omega_b: f64,
    /// Coupling J, cm⁻¹.
    pub coupling: f64,
    /// Site dipole norms.
    pub dipole_a: f64,
    pub dipole_b: f64,
    /// Angle between the site dipoles, degrees.
    pub phi_deg: f64,
}

impl Default for DimerSection {
    fn default() -> Self {
        DimerSection {
            omega_a: 16633.0,
            omega_b: 16633.0,
            coupling: 175.0,
            dipole_a: 1.0,
            dipole_b: 1.0,
            phi_deg: 65.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathMode {
    /// Tabulated porphyrin rates with the downhill rate completed by detailed balance.
    Porphyrin,
    /// Every rate given explicitly; the uphill/downhill pair is checked.
    Table,
    /// Downhill rate and temperature given; the uphill rate follows.
    Boltzmann,
    /// No bath at all.
    Unitary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathSection {
    pub mode: BathMode,
    pub temperature: f64,
    pub uphill: Option<f64>,
    pub downhill: Option<f64>,
    pub coherence: f64,
    pub alpha_g: f64,
    pub beta_g: f64,
    pub f_alpha: f64,
    pub f_beta: f64,
    pub f_g: f64,
    pub radiative: f64,
    pub reorganization: f64,
    pub cutoff: f64,
}

impl Default for BathSection {
    fn default() -> Self {
        let r = RedfieldRates::porphyrin(350.0, 273.0);
        BathSection {
            mode: BathMode::Porphyrin,
            temperature: 273.0,
            uphill: None,
            downhill: None,
            coherence: r.coherence,
            alpha_g: r.alpha_g,
            beta_g: r.beta_g,
            f_alpha: r.f_alpha,
            f_beta: r.f_beta,
            f_g: r.f_g,
            radiative: 0.0,
            reorganization: 100.0,
            cutoff: 150.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    /// cm⁻¹, one per pulse.
    pub carriers: [f64; 3],
    pub fwhm_fs: f64,
    /// Amplitude scale λ; defaults to the value giving C = −i on resonance.
    pub lambda: Option<f64>,
    pub equal_amplitude: bool,
    pub configs: Vec<String>,
}

impl Default for PulseSection {
    fn default() -> Self {
        PulseSection {
            carriers: [16546.0; 3],
            fwhm_fs: 20.0,
            lambda: None,
            equal_amplitude: true,
            configs: vec!["zzzz".into(), "zzxx".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub waiting_times_fs: Vec<f64>,
    pub omega_tau_start: f64,
    pub omega_tau_step: f64,
    pub omega_tau_len: usize,
    pub omega_t_start: f64,
    pub omega_t_step: f64,
    pub omega_t_len: usize,
    /// Time-domain mode: sampling of τ and t.
    pub time_step_fs: f64,
    pub time_span_fs: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            waiting_times_fs: [0.5, 1.0, 1.5, 2.0, 4.5, 5.0].iter().map(|k| k * T_C).collect(),
            omega_tau_start: 16108.0,
            omega_tau_step: 1.0,
            omega_tau_len: 1051,
            omega_t_start: 16108.0,
            omega_t_step: 1.0,
            omega_t_len: 1051,
            time_step_fs: 0.25,
            time_span_fs: 600.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub seed: u64,
    /// Standard deviation of the additive complex noise, as a fraction of max |S(ω_τ, ω_t)|.
    pub level: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection { seed: 7, level: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InversionSection {
    pub kappa_threshold: f64,
    pub ridge: f64,
    pub root_tol: f64,
}

impl Default for InversionSection {
    fn default() -> Self {
        InversionSection {
            kappa_threshold: 15.0,
            ridge: 0.0,
            root_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dimer: DimerSection,
    pub bath: BathSection,
    pub pulses: PulseSection,
    pub grid: GridSection,
    pub noise: NoiseSection,
    pub inversion: InversionSection,
    pub output: Option<PathBuf>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => bad(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.dimer;
        if !(d.phi_deg > 0.0 && d.phi_deg < 180.0) {
            return Err(bad(format!("dimer.phi_deg must lie in (0, 180), got {}", d.phi_deg)));
        }
        if !(d.dipole_a > 0.0 && d.dipole_b > 0.0) {
            return Err(bad("dimer dipole norms must be positive"));
        }
        self.site_dimer()?;
        let g = &self.grid;
        if g.waiting_times_fs.is_empty() {
            return Err(bad("grid.waiting_times_fs is empty"));
        }
        if let Some(t) = g.waiting_times_fs.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
            return Err(bad(format!("waiting time {t} fs precedes the first snapshot at 0 fs")));
        }
        for (name, step, len) in [
            ("omega_tau", g.omega_tau_step, g.omega_tau_len),
            ("omega_t", g.omega_t_step, g.omega_t_len),
        ] {
            if !(step > 0.0) {
                return Err(bad(format!("grid.{name}_step must be positive, got {step}")));
            }
            if len < 3 {
                return Err(bad(format!("grid.{name}_len must be at least 3, got {len}")));
            }
        }
        if !(g.time_step_fs > 0.0) || !(g.time_span_fs > 0.0) {
            return Err(bad("grid.time_step_fs and grid.time_span_fs must be positive"));
        }
        if !(self.pulses.fwhm_fs > 0.0) {
            return Err(bad(format!("pulses.fwhm_fs must be positive, got {}", self.pulses.fwhm_fs)));
        }
        if self.pulses.configs.is_empty() {
            return Err(bad("pulses.configs is empty"));
        }
        for c in &self.pulses.configs {
            PolarizationConfig::from_tag(c).map_err(|e| bad(format!("pulses.configs: {e}")))?;
        }
        if !(self.noise.level >= 0.0) {
            return Err(bad("noise.level must be nonnegative"));
        }
        if !(self.inversion.kappa_threshold > 0.0) || !(self.inversion.ridge >= 0.0) || !(self.inversion.root_tol > 0.0) {
            return Err(bad("inversion thresholds must be positive (ridge nonnegative)"));
        }
        self.redfield()?;
        Ok(())
    }

    pub fn site_dimer(&self) -> Result<SiteDimer> {
        let d = &self.dimer;
        let phi = d.phi_deg.to_radians();
        SiteDimer::new(
            d.omega_a,
            d.omega_b,
            d.coupling,
            Vec3::x() * d.dipole_a,
            Vec3::new(phi.cos(), phi.sin(), 0.0) * d.dipole_b,
        )
        .map_err(|e| bad(format!("dimer: {e}")))
    }

    pub fn eigen(&self) -> Result<EigenDimer> {
        Ok(diagonalize(&self.site_dimer()?))
    }

    pub fn redfield(&self) -> Result<RedfieldModel> {
        let eigen = self.eigen()?;
        let gap = eigen.omega_beta - eigen.omega_alpha;
        let b = &self.bath;
        let rates = |uphill: f64, downhill: f64| RedfieldRates {
            uphill,
            downhill,
            coherence: b.coherence,
            alpha_g: b.alpha_g,
            beta_g: b.beta_g,
            f_alpha: b.f_alpha,
            f_beta: b.f_beta,
            f_g: b.f_g,
        };
        let r = match b.mode {
            BathMode::Porphyrin => {
                let up = b.uphill.unwrap_or(8.02e-4);
                rates(up, up / boltzmann_factor(gap, b.temperature))
            }
            BathMode::Table => match (b.uphill, b.downhill) {
                (Some(u), Some(d)) => rates(u, d),
                _ => return Err(bad("bath.mode = \"table\" needs both bath.uphill and bath.downhill")),
            },
            BathMode::Boltzmann => {
                let d = b.downhill.ok_or_else(|| bad("bath.mode = \"boltzmann\" needs bath.downhill"))?;
                rates(d * boltzmann_factor(gap, b.temperature), d)
            }
            BathMode::Unitary => RedfieldRates::zero(),
        };
        let mut m = RedfieldModel::new(r, b.temperature, gap)
            .and_then(|m| m.with_radiative(if b.mode == BathMode::Unitary { 0.0 } else { b.radiative }))
            .map_err(|e| bad(format!("bath: {e}")))?;
        m.bath = Some(OhmicBath {
            reorganization: b.reorganization,
            cutoff: b.cutoff,
        });
        Ok(m)
    }

    pub fn dephasing(&self) -> DephasingSet {
        if self.bath.mode == BathMode::Unitary {
            // optical lines keep a finite width so peaks stay resolvable
            let d = BathSection::default();
            return DephasingSet::mean_of(d.alpha_g, d.beta_g);
        }
        DephasingSet::mean_of(self.bath.alpha_g, self.bath.beta_g)
    }

    pub fn pulse_sequence(&self) -> Result<PulseSequence> {
        let p = &self.pulses;
        let sigma = sigma_from_fwhm(p.fwhm_fs);
        let lambda = p.lambda.unwrap_or(PulseSpec::unit_lambda(sigma));
        let mk = |c: f64| PulseSpec::new(Vec3::z(), c, sigma, lambda).map_err(|e| bad(format!("pulses: {e}")));
        Ok(PulseSequence {
            pulses: [mk(p.carriers[0])?, mk(p.carriers[1])?, mk(p.carriers[2])?],
            dephasing: self.dephasing(),
            equal_amplitude: p.equal_amplitude,
        })
    }

    pub fn polarizations(&self) -> Result<Vec<PolarizationConfig>> {
        self.pulses.configs.iter().map(|c| PolarizationConfig::from_tag(c)).collect()
    }

    pub fn axes(&self) -> Result<(Axis, Axis)> {
        let g = &self.grid;
        Ok((
            Axis::new(g.omega_tau_start, g.omega_tau_step, g.omega_tau_len)?,
            Axis::new(g.omega_t_start, g.omega_t_step, g.omega_t_len)?,
        ))
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::covering(self.grid.time_span_fs, self.grid.time_step_fs)
    }
}

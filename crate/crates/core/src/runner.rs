//! Batch commands behind the CLI: simulate, invert, stability and roundtrip.

use crate::config::{BathMode, RunConfig};
use crate::dynamics::{propagate_chi, validate_constraints, Level, ProcessMatrix, RedfieldModel};
use crate::error::{Error, Result, Stage};
use crate::exciton::EigenDimer;
use crate::inversion::{
    kappa, run_protocol, FitHint, FitOptions, InvertOptions, ProtocolOptions, QptReport, EXTRACTED,
};
use crate::spectroscopy::{
    assemble_spectrum, bracket_warnings, pathway_terms, peak_amplitudes_general, peak_amplitudes_homodimer, Averaging,
    Exciton, PeakAmplitudeSet, PolarizationConfig, PulseSequence, Spectrum2D,
};
use crate::units::wavenumber_to_angular;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::Path;

pub const MANIFEST: &str = "manifest.json";
pub const CHI_ORACLE: &str = "chi_oracle.csv";
pub const CHI_RECONSTRUCTED: &str = "chi_reconstructed.csv";
pub const REPORT: &str = "report.json";

/// Forward simulation held in memory.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: RunConfig,
    pub eigen: EigenDimer,
    pub model: RedfieldModel,
    pub pulses: PulseSequence,
    pub chi: ProcessMatrix,
    /// One set per polarization setting, in config order.
    pub peaks: Vec<PeakAmplitudeSet>,
    /// T-major, polarization-minor.
    pub spectra: Vec<Spectrum2D>,
    pub warnings: Vec<String>,
}

/// Normalization and starting values the inversion needs, as stored in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionInputs {
    pub dipole: Option<f64>,
    pub coefficient: Option<[f64; 2]>,
    pub hint: Option<FitHint>,
    pub kappa_threshold: f64,
    pub ridge: f64,
    pub root_tol: f64,
}

pub fn spectrum_stem(config: &str, k: usize) -> String {
    format!("spectrum_{config}_T{k:02}")
}

fn noise_seed(base: u64, k: usize, c: usize) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add((k as u64) << 8 | c as u64)
}

/// Adds seeded complex Gaussian noise with standard deviation `level`·max|S| per component.
pub fn add_noise(spec: &mut Spectrum2D, level: f64, seed: u64) {
    if level <= 0.0 {
        return;
    }
    let sd = level * spec.max_abs();
    if sd == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, sd).expect("finite deviation");
    for v in spec.values.iter_mut() {
        *v += Complex64::new(n.sample(&mut rng), n.sample(&mut rng));
    }
}

pub fn simulate(cfg: &RunConfig) -> Result<Simulation> {
    cfg.validate()?;
    let eigen = cfg.eigen()?;
    let model = cfg.redfield()?;
    let pulses = cfg.pulse_sequence()?;
    let pols = cfg.polarizations()?;
    let (ax_tau, ax_t) = cfg.axes()?;
    let times = cfg.grid.waiting_times_fs.clone();
    let chi = propagate_chi(&model, &eigen, &times)?;
    let mut warnings = bracket_warnings(&eigen, &ax_tau, &ax_t);
    if !pulses.equal_amplitude {
        let c = pulses.coefficients(&eigen);
        if (c[0][0] - c[0][1]).norm() > 1e-12 * c[0][0].norm() {
            warnings.push(format!(
                "pulse coefficients differ between excitons ({} vs {}); the inversion assumes a common value",
                c[0][0], c[0][1]
            ));
        }
    }
    let peaks = pols
        .iter()
        .map(|p| peak_amplitudes_general(&chi, &eigen, &pulses, p, Averaging::Isotropic))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..times.len()).flat_map(|k| (0..pols.len()).map(move |c| (k, c))).collect();
    let spectra: Vec<Spectrum2D> = jobs
        .par_iter()
        .map(|&(k, c)| {
            let mut s = assemble_spectrum(&peaks[c], k, &eigen, &pulses.dephasing, ax_tau, ax_t);
            add_noise(&mut s, cfg.noise.level, noise_seed(cfg.noise.seed, k, c));
            s
        })
        .collect();
    if spectra.iter().any(|s| s.values.iter().any(|z| !z.is_finite())) {
        return Err(Error::InvalidInput("non-finite values in the simulated spectra".into()));
    }
    Ok(Simulation {
        config: cfg.clone(),
        eigen,
        model,
        pulses,
        chi,
        peaks,
        spectra,
        warnings,
    })
}

fn inversion_inputs(cfg: &RunConfig, eigen: &EigenDimer, pulses: &PulseSequence) -> InversionInputs {
    let d = &cfg.dimer;
    let c = pulses.coefficients(eigen)[0][0];
    InversionInputs {
        dipole: (d.dipole_a == d.dipole_b).then_some(d.dipole_a),
        coefficient: Some([c.re, c.im]),
        hint: Some(FitHint {
            omega_alpha: eigen.omega_alpha,
            omega_beta: eigen.omega_beta,
            gamma: Some(pulses.dephasing.alpha_g),
        }),
        kappa_threshold: cfg.inversion.kappa_threshold,
        ridge: cfg.inversion.ridge,
        root_tol: cfg.inversion.root_tol,
    }
}

fn require_homodimer(eigen: &EigenDimer) -> Result<()> {
    if eigen.is_homodimer(1e-9) {
        return Ok(());
    }
    Err(Error::Config(format!(
        "the inversion protocol needs a homodimer; site energies give alpha at {} and beta at {} cm^-1 with non-perpendicular dipoles",
        eigen.omega_alpha, eigen.omega_beta
    )))
}

fn manifest(cfg: &RunConfig, sim: Option<&Simulation>, dry_run: bool) -> Result<serde_json::Value> {
    let eigen = cfg.eigen()?;
    let model = cfg.redfield()?;
    let pulses = cfg.pulse_sequence()?;
    let c = pulses.coefficients(&eigen);
    let spectra: Vec<_> = cfg
        .grid
        .waiting_times_fs
        .iter()
        .enumerate()
        .flat_map(|(k, t)| {
            cfg.pulses
                .configs
                .iter()
                .map(move |p| json!({"stem": spectrum_stem(p, k), "config": p, "waiting_time_fs": t}))
        })
        .collect();
    let peaks: serde_json::Map<String, serde_json::Value> = cfg
        .pulses
        .configs
        .iter()
        .map(|p| (p.clone(), json!(format!("peaks_{p}.csv"))))
        .collect();
    Ok(json!({
        "format": "dimer-qpt run manifest",
        "version": 1,
        "dry_run": dry_run,
        "homodimer": eigen.is_homodimer(1e-9),
        "config": cfg,
        "derived": {
            "omega_alpha_cm": eigen.omega_alpha,
            "omega_beta_cm": eigen.omega_beta,
            "omega_f_cm": eigen.omega_f,
            "mixing_angle_rad": eigen.theta,
            "mu_alpha_g": [eigen.mu_alpha_g.x, eigen.mu_alpha_g.y, eigen.mu_alpha_g.z],
            "mu_beta_g": [eigen.mu_beta_g.x, eigen.mu_beta_g.y, eigen.mu_beta_g.z],
            "pulse_sigma_fs": pulses.pulses[0].sigma,
            "pulse_lambda": pulses.pulses[0].lambda_scale,
            "pulse_coefficients": c.iter().map(|p| p.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "rates_per_fs": model.rates,
            "temperature_k": model.temperature,
            "radiative_per_fs": model.radiative,
            "dephasing_per_fs": {
                "alpha_g": pulses.dephasing.alpha_g,
                "beta_g": pulses.dephasing.beta_g,
                "f_alpha": pulses.dephasing.f_alpha,
                "f_beta": pulses.dephasing.f_beta,
            },
        },
        "inversion": inversion_inputs(cfg, &eigen, &pulses),
        "files": {
            "chi_oracle": CHI_ORACLE,
            "peaks": peaks,
            "spectra": spectra,
        },
        "warnings": sim.map(|s| s.warnings.clone()).unwrap_or_default(),
    }))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("cannot create {}: {e}", dir.display()))))
}

/// Writes spectra, amplitudes, the oracle χ and the manifest. With `dry_run` only the
/// manifest is written.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path, dry_run: bool) -> Result<Option<Simulation>> {
    cfg.validate()?;
    ensure_dir(out)?;
    if dry_run {
        let m = manifest(cfg, None, true)?;
        std::fs::write(out.join(MANIFEST), serde_json::to_string_pretty(&m)?)?;
        return Ok(None);
    }
    let sim = simulate(cfg)?;
    sim.chi.write_csv(&out.join(CHI_ORACLE))?;
    for p in &sim.peaks {
        std::fs::write(out.join(format!("peaks_{}.csv", p.config)), p.to_csv())?;
    }
    let n_pol = sim.peaks.len();
    sim.spectra
        .par_iter()
        .enumerate()
        .try_for_each(|(i, s)| s.write(out, &spectrum_stem(&s.config, i / n_pol)))?;
    let m = manifest(cfg, Some(&sim), false)?;
    std::fs::write(out.join(MANIFEST), serde_json::to_string_pretty(&m)?)?;
    Ok(Some(sim))
}

fn protocol_options(inputs: Option<&InversionInputs>) -> ProtocolOptions {
    let mut o = ProtocolOptions::default();
    if let Some(i) = inputs {
        o.dipole = i.dipole;
        o.coefficient = i.coefficient.map(|[re, im]| Complex64::new(re, im));
        o.hint = i.hint;
        o.invert = InvertOptions {
            kappa_threshold: i.kappa_threshold,
            ridge: i.ridge,
        };
        o.root_tol = i.root_tol;
    }
    o.fit = FitOptions::default();
    o
}

/// Spectrum stems in `dir`: from the manifest when present, else every sidecar JSON.
fn spectrum_stems(dir: &Path, manifest: Option<&serde_json::Value>) -> Result<Vec<String>> {
    if let Some(list) = manifest.and_then(|m| m.pointer("/files/spectra")).and_then(|v| v.as_array()) {
        return Ok(list
            .iter()
            .filter_map(|e| e.get("stem").and_then(|s| s.as_str()).map(String::from))
            .collect());
    }
    let mut stems: Vec<String> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.starts_with("spectrum_") && n.ends_with(".json"))
        .map(|n| n.trim_end_matches(".json").to_string())
        .collect();
    stems.sort();
    Ok(stems)
}

/// Reads spectra from `input`, runs the protocol and writes the report and χ CSV to `out`.
pub fn cmd_invert(input: &Path, out: &Path) -> Result<QptReport> {
    if !input.is_dir() {
        return Err(Error::InvalidInput(format!("{} is not a directory", input.display())).at(Stage::Fit));
    }
    let manifest: Option<serde_json::Value> = match std::fs::read_to_string(input.join(MANIFEST)) {
        Ok(text) => Some(serde_json::from_str(&text)?),
        Err(_) => None,
    };
    if manifest.as_ref().and_then(|m| m.get("dry_run")).and_then(|v| v.as_bool()) == Some(true) {
        return Err(Error::InvalidInput("manifest comes from a dry run; no spectra were written".into()).at(Stage::Fit));
    }
    if manifest.as_ref().and_then(|m| m.get("homodimer")).and_then(|v| v.as_bool()) == Some(false) {
        return Err(Error::Config("the inversion protocol needs a homodimer; this run simulated a heterodimer".into()));
    }
    let inputs: Option<InversionInputs> = manifest
        .as_ref()
        .and_then(|m| m.get("inversion"))
        .map(|v| serde_json::from_value(v.clone()))
        .transpose()?;
    let stems = spectrum_stems(input, manifest.as_ref())?;
    if stems.is_empty() {
        return Err(Error::InvalidInput(format!("no spectra found in {}", input.display())).at(Stage::Fit));
    }
    let spectra = stems
        .par_iter()
        .map(|s| Spectrum2D::read(input, s))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at(Stage::Fit))?;
    let report = run_protocol(&spectra, &protocol_options(inputs.as_ref()))?;
    ensure_dir(out)?;
    std::fs::write(out.join(REPORT), report.to_json()?)?;
    report.process.write_csv(&out.join(CHI_RECONSTRUCTED))?;
    std::fs::write(out.join("peaks_fitted_zzzz.csv"), report.zzzz.to_csv())?;
    std::fs::write(out.join("peaks_fitted_zzxx.csv"), report.zzxx.to_csv())?;
    Ok(report)
}

/// κ(φ) table on `steps` evenly spaced angles in [phi_min, phi_max] (radians).
pub fn cmd_stability(phi_min: f64, phi_max: f64, steps: usize) -> Result<String> {
    let pi = std::f64::consts::PI;
    if !(0.0 < phi_min && phi_min <= phi_max && phi_max < pi) || steps == 0 {
        return Err(Error::Config(format!(
            "need 0 < phi_min <= phi_max < pi and steps >= 1 (got {phi_min}, {phi_max}, {steps})"
        )));
    }
    let mut out = String::from("phi_rad,phi_over_pi,phi_deg,kappa,kappa_threshold\n");
    for i in 0..steps {
        let phi = if steps == 1 {
            phi_min
        } else {
            phi_min + (phi_max - phi_min) * i as f64 / (steps - 1) as f64
        };
        let k = kappa(phi);
        out.push_str(&format!("{phi:.12},{:.12},{:.9},{k:.12e},15\n", phi / pi, phi.to_degrees()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundtripSummary {
    pub phi_deg: f64,
    pub kappa: f64,
    pub low_confidence: bool,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
}

impl RoundtripSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        detail,
    }
}

/// Largest relative (|χ| > 0.05) and absolute (elsewhere) deviation over the extracted entries.
pub fn chi_deviation(got: &ProcessMatrix, want: &ProcessMatrix) -> Result<(f64, f64)> {
    let (mut rel, mut abs) = (0.0f64, 0.0f64);
    for k in 0..want.len() {
        for (a, b, c, d) in EXTRACTED {
            let (g, w) = (got.entry(k, a, b, c, d)?, want.entry(k, a, b, c, d)?);
            if w.norm() > 0.05 {
                rel = rel.max((g - w).norm() / w.norm());
            } else {
                abs = abs.max((g - w).norm());
            }
        }
    }
    Ok((rel, abs))
}

/// Worst relative error of fitted amplitudes, measured against the largest amplitude of
/// each spectrum.
pub fn fit_fidelity(report: &QptReport, truth: &[PeakAmplitudeSet]) -> f64 {
    let mut worst = 0.0f64;
    for f in &report.fits {
        let Some(set) = truth.iter().find(|p| p.config == f.config) else { continue };
        let Some(k) = set.times.iter().position(|t| (t - f.waiting_time).abs() < 1e-9) else { continue };
        let scale = set.values[k].iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        for m in 0..2 {
            for n in 0..2 {
                worst = worst.max((f.s[m][n] - set.values[k][m][n]).norm() / scale);
            }
        }
    }
    1.0 - worst
}

/// Simulate → invert → compare, entirely in memory.
pub fn cmd_roundtrip(cfg: &RunConfig) -> Result<RoundtripSummary> {
    require_homodimer(&cfg.eigen()?)?;
    let sim = simulate(cfg)?;
    let inputs = inversion_inputs(cfg, &sim.eigen, &sim.pulses);
    let report = run_protocol(&sim.spectra, &protocol_options(Some(&inputs)))?;
    let mut checks = Vec::new();
    let phi_true = cfg.dimer.phi_deg;

    let k_phi = report.chi.kappa;
    checks.push(check(
        "conditioning_at_phi",
        !report.chi.low_confidence,
        format!("kappa({phi_true} deg) = {k_phi:.4}, threshold {}", cfg.inversion.kappa_threshold),
    ));

    let dphi = (report.angle.phi_deg() - phi_true).abs();
    checks.push(check(
        "angle_recovery",
        dphi <= 0.1 && report.angle.spread < 1e-3,
        format!("phi = {:.6} deg (error {dphi:.2e}), root spread {:.2e}", report.angle.phi_deg(), report.angle.spread),
    ));

    let (rel, abs) = chi_deviation(&report.process, &sim.chi)?;
    let fid = fit_fidelity(&report, &sim.peaks);
    checks.push(check(
        "chi_round_trip",
        rel <= 0.01 && abs <= 0.01 && fid >= 0.99,
        format!("max rel {rel:.3e}, max abs {abs:.3e}, fit fidelity {fid:.6}"),
    ));

    let mut vanishing = 0.0f64;
    for p in [PolarizationConfig::zzzz(), PolarizationConfig::zzxx()] {
        for t in pathway_terms(&sim.eigen, &sim.pulses, &p, Averaging::Isotropic) {
            if t.is_population_coherence() {
                vanishing = vanishing.max(t.coefficient.norm());
            }
        }
    }
    checks.push(check(
        "vanishing_population_coherence",
        vanishing < 1e-12,
        format!("largest weight {vanishing:.3e}"),
    ));

    let phys = validate_constraints(&sim.chi, 1e-10);
    checks.push(check(
        "physicality",
        phys.passes(),
        format!("trace {:.2e}, hermiticity {:.2e}", phys.max_trace(), phys.max_hermiticity()),
    ));

    if cfg.bath.mode != BathMode::Unitary {
        let r = &sim.model.rates;
        let ratio = r.downhill / r.uphill;
        let want = sim.model.boltzmann_ratio();
        checks.push(check(
            "detailed_balance",
            ((ratio - want) / want).abs() <= 0.01,
            format!("R_down/R_up = {ratio:.6}, Boltzmann {want:.6}"),
        ));
    } else {
        let w = wavenumber_to_angular(sim.eigen.omega_alpha_beta());
        let z = &report.zzzz;
        let mut diag = 0.0f64;
        let mut phase = 0.0f64;
        for k in 0..z.times.len() {
            for m in [Exciton::Alpha, Exciton::Beta] {
                let v = z.get(k, m, m);
                diag = diag.max((v - z.get(0, m, m)).norm() / z.get(0, m, m).norm());
            }
        }
        for k in 0..z.times.len().saturating_sub(2) {
            let d0 = z.get(k + 1, Exciton::Alpha, Exciton::Beta) - z.get(k, Exciton::Alpha, Exciton::Beta);
            let d1 = z.get(k + 2, Exciton::Alpha, Exciton::Beta) - z.get(k + 1, Exciton::Alpha, Exciton::Beta);
            let dt = z.times[k + 1] - z.times[k];
            let dt2 = z.times[k + 2] - z.times[k + 1];
            if (dt - dt2).abs() > 1e-9 {
                continue;
            }
            let err = ((d1 / d0).arg() - w * dt + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
                - std::f64::consts::PI;
            phase = phase.max(err.abs());
        }
        checks.push(check(
            "unitary_limit",
            diag < 1e-6 && phase < 1e-4,
            format!("diagonal variation {diag:.3e}, cross-peak phase error {phase:.3e} rad"),
        ));
    }

    let mut tables = 0.0f64;
    if sim.eigen.is_homodimer(1e-9) {
        for p in [PolarizationConfig::zzzz(), PolarizationConfig::zzxx()] {
            let g = peak_amplitudes_general(&sim.chi, &sim.eigen, &sim.pulses, &p, Averaging::Isotropic)?;
            let h = peak_amplitudes_homodimer(&sim.chi, &sim.eigen, &sim.pulses, &p)?;
            for k in 0..g.times.len() {
                for m in [Exciton::Alpha, Exciton::Beta] {
                    for n in [Exciton::Alpha, Exciton::Beta] {
                        let (a, b) = (g.get(k, m, n), h.get(k, m, n));
                        tables = tables.max((a - b).norm() / a.norm().max(b.norm()).max(1e-300));
                    }
                }
            }
        }
    }
    checks.push(check(
        "closed_form_tables",
        tables < 1e-12,
        format!("max relative difference {tables:.3e}"),
    ));

    // ground state inert in the oracle, as the protocol assumes
    let g = sim.chi.entry(0, Level::G, Level::G, Level::G, Level::G)?;
    if (g - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        checks.push(check("ground_inert", false, format!("chi_gggg = {g}")));
    }

    let mut warnings = sim.warnings.clone();
    warnings.extend(report.warnings.iter().cloned());
    Ok(RoundtripSummary {
        phi_deg: report.angle.phi_deg(),
        kappa: k_phi,
        low_confidence: report.chi.low_confidence,
        checks,
        warnings,
    })
}

/// Coarse ASCII rendering of |S| for a quick look.
pub fn ascii_preview(spec: &Spectrum2D, width: usize, height: usize) -> String {
    const RAMP: &[u8] = b" .:-=+*#%@";
    let max = spec.max_abs();
    let mut out = String::new();
    for r in 0..height {
        // high ω_τ at the top
        let i = (height - 1 - r) * (spec.omega_tau.len - 1) / (height - 1).max(1);
        for c in 0..width {
            let j = c * (spec.omega_t.len - 1) / (width - 1).max(1);
            let v = if max > 0.0 { spec.at(i, j).norm() / max } else { 0.0 };
            out.push(RAMP[((v * (RAMP.len() - 1) as f64).round() as usize).min(RAMP.len() - 1)] as char);
        }
        out.push('\n');
    }
    out
}

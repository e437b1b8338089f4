//! The three-step protocol: fit every spectrum, extract φ, reconstruct χ(T).

use super::angle::{extract_angle_with, AngleSolution, ROOT_TOL};
use super::fit::{fit_peaks_with, FitHint, FitOptions, PeakFitResult};
use super::reconstruct::{invert_chi, InvertOptions, ReconstructedChi};
use crate::dynamics::{validate_constraints, ConstraintReport, ProcessMatrix};
use crate::error::{Error, Result, Stage};
use crate::spectroscopy::{PeakAmplitudeSet, Spectrum2D};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct ProtocolOptions {
    pub fit: FitOptions,
    pub invert: InvertOptions,
    pub hint: Option<FitHint>,
    pub root_tol: f64,
    /// Site dipole norm; `None` leaves χ scaled by d⁴.
    pub dipole: Option<f64>,
    /// Common pulse coefficient C; `None` leaves χ scaled by iC³.
    pub coefficient: Option<Complex64>,
    pub constraint_tol: f64,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            fit: FitOptions::default(),
            invert: InvertOptions::default(),
            hint: None,
            root_tol: ROOT_TOL,
            dipole: None,
            coefficient: None,
            constraint_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QptReport {
    pub fits: Vec<PeakFitResult>,
    pub zzzz: PeakAmplitudeSet,
    pub zzxx: PeakAmplitudeSet,
    pub angle: AngleSolution,
    pub chi: ReconstructedChi,
    pub process: ProcessMatrix,
    pub constraints: ConstraintReport,
    pub absolute_scale: bool,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct TimeSummary {
    time_fs: f64,
    xi: f64,
    root_mismatch: f64,
    ambiguous_roots: bool,
    fit_relative_residual_zzzz: f64,
    fit_relative_residual_zzxx: f64,
    route_disagreement: f64,
    side_disagreement: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    phi_deg: f64,
    xi: f64,
    root_spread: f64,
    ambiguous_roots: bool,
    kappa: f64,
    low_confidence: bool,
    scale: &'a str,
    max_route_disagreement: f64,
    max_side_disagreement: f64,
    constraints: &'a ConstraintReport,
    per_time: Vec<TimeSummary>,
    angle: &'a AngleSolution,
    fits: &'a [PeakFitResult],
    estimates: &'a ReconstructedChi,
    warnings: &'a [String],
}

impl QptReport {
    pub fn to_json(&self) -> Result<String> {
        let fit_for = |cfg: &str, t: f64| {
            self.fits
                .iter()
                .find(|f| f.config == cfg && f.waiting_time == t)
                .map_or(f64::NAN, |f| f.relative_residual)
        };
        let per_time = self
            .angle
            .per_time
            .iter()
            .zip(&self.chi.estimates)
            .map(|(r, e)| TimeSummary {
                time_fs: r.time,
                xi: r.xi,
                root_mismatch: r.mismatch,
                ambiguous_roots: r.ambiguous,
                fit_relative_residual_zzzz: fit_for("zzzz", r.time),
                fit_relative_residual_zzxx: fit_for("zzxx", r.time),
                route_disagreement: e.route_disagreement(),
                side_disagreement: e.side_disagreement(),
            })
            .collect();
        let s = Summary {
            phi_deg: self.angle.phi_deg(),
            xi: self.angle.xi,
            root_spread: self.angle.spread,
            ambiguous_roots: self.angle.ambiguous,
            kappa: self.chi.kappa,
            low_confidence: self.chi.low_confidence,
            scale: if self.absolute_scale { "absolute" } else { "up to (iC^3 d^4)^-1" },
            max_route_disagreement: self.chi.max_route_disagreement(),
            max_side_disagreement: self.chi.max_side_disagreement(),
            constraints: &self.constraints,
            per_time,
            angle: &self.angle,
            fits: &self.fits,
            estimates: &self.chi,
            warnings: &self.warnings,
        };
        Ok(serde_json::to_string_pretty(&s)?)
    }
}

/// Collects fitted amplitudes for one setting, ordered by waiting time.
pub fn amplitude_set(fits: &[&PeakFitResult], config: &str, carriers: [f64; 3]) -> PeakAmplitudeSet {
    PeakAmplitudeSet {
        times: fits.iter().map(|f| f.waiting_time).collect(),
        values: fits.iter().map(|f| f.s).collect(),
        config: config.to_string(),
        carriers,
    }
}

/// Pairs zzzz/zzxx spectra by waiting time.
fn pair_spectra(spectra: &[Spectrum2D]) -> Result<Vec<(&Spectrum2D, &Spectrum2D)>> {
    if spectra.is_empty() {
        return Err(Error::InvalidInput("no spectra supplied".into()));
    }
    let mut z: Vec<&Spectrum2D> = spectra.iter().filter(|s| s.config == "zzzz").collect();
    let x: Vec<&Spectrum2D> = spectra.iter().filter(|s| s.config == "zzxx").collect();
    if z.len() + x.len() != spectra.len() {
        let other: Vec<&str> = spectra
            .iter()
            .filter(|s| s.config != "zzzz" && s.config != "zzxx")
            .map(|s| s.config.as_str())
            .collect();
        return Err(Error::InvalidInput(format!("unsupported polarization settings {other:?}")));
    }
    z.sort_by(|a, b| a.waiting_time.total_cmp(&b.waiting_time));
    let mut out = Vec::with_capacity(z.len());
    for s in &z {
        let partner = x
            .iter()
            .find(|o| (o.waiting_time - s.waiting_time).abs() <= 1e-9 * s.waiting_time.abs().max(1.0))
            .ok_or_else(|| Error::InvalidInput(format!("no zzxx spectrum for T = {} fs", s.waiting_time)))?;
        out.push((*s, *partner));
    }
    if out.len() != x.len() {
        return Err(Error::InvalidInput("zzxx spectra without a zzzz partner".into()));
    }
    Ok(out)
}

pub fn run_protocol(spectra: &[Spectrum2D], opts: &ProtocolOptions) -> Result<QptReport> {
    let pairs = pair_spectra(spectra).map_err(|e| e.at(Stage::Fit))?;
    let jobs: Vec<&Spectrum2D> = pairs.iter().flat_map(|(z, x)| [*z, *x]).collect();
    let fits: Vec<PeakFitResult> = jobs
        .par_iter()
        .map(|s| fit_peaks_with(s, opts.hint.as_ref(), &opts.fit))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at(Stage::Fit))?;
    let mut warnings = Vec::new();
    for f in &fits {
        for w in &f.warnings {
            warnings.push(format!("fit {} T={} fs: {w}", f.config, f.waiting_time));
        }
    }
    let zf: Vec<&PeakFitResult> = fits.iter().step_by(2).collect();
    let xf: Vec<&PeakFitResult> = fits.iter().skip(1).step_by(2).collect();
    let zzzz = amplitude_set(&zf, "zzzz", [f64::NAN; 3]);
    let zzxx = amplitude_set(&xf, "zzxx", [f64::NAN; 3]);

    let angle = extract_angle_with(&zzzz, &zzxx, opts.root_tol).map_err(|e| e.at(Stage::Angle))?;
    if angle.ambiguous {
        warnings.push("more than one root pair matched within tolerance at some waiting time".into());
    }
    let absolute_scale = opts.dipole.is_some() && opts.coefficient.is_some();
    let d = opts.dipole.unwrap_or(1.0);
    let c = opts.coefficient.unwrap_or(Complex64::new(0.0, -1.0));
    let chi = invert_chi(&zzzz, &zzxx, angle.phi, d, c, &opts.invert).map_err(|e| e.at(Stage::Reconstruction))?;
    if chi.low_confidence {
        warnings.push(format!(
            "condition number {:.3} exceeds the threshold {}",
            chi.kappa, opts.invert.kappa_threshold
        ));
    }
    let process = chi.to_process_matrix();
    let constraints = validate_constraints(&process, opts.constraint_tol);
    Ok(QptReport {
        fits,
        zzzz,
        zzxx,
        angle,
        chi,
        process,
        constraints,
        absolute_scale,
        warnings,
    })
}

use super::amplitudes::{Exciton, PeakAmplitudeSet, PulseSequence};
use super::isotropic::{isotropic_average, oriented_product, Averaging, PolarizationConfig};
use crate::dynamics::{Level, ProcessMatrix};
use crate::error::Result;
use crate::exciton::{EigenDimer, Vec3};
use num_complex::Complex64;

/// Transition dipoles of the dimer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dipole {
    AlphaG,
    BetaG,
    FAlpha,
    FBeta,
}

impl Dipole {
    pub fn vector(self, eigen: &EigenDimer) -> &Vec3 {
        match self {
            Dipole::AlphaG => &eigen.mu_alpha_g,
            Dipole::BetaG => &eigen.mu_beta_g,
            Dipole::FAlpha => &eigen.mu_f_alpha,
            Dipole::FBeta => &eigen.mu_f_beta,
        }
    }

    fn ground(x: Exciton) -> Dipole {
        match x {
            Exciton::Alpha => Dipole::AlphaG,
            Exciton::Beta => Dipole::BetaG,
        }
    }
}

/// Optical coherence radiating during the echo time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Echo {
    AlphaG,
    BetaG,
    FAlpha,
    FBeta,
}

impl Echo {
    pub const ALL: [Echo; 4] = [Echo::AlphaG, Echo::BetaG, Echo::FAlpha, Echo::FBeta];

    /// Peak column the coherence oscillates at (ω_fβ = ω_αg, ω_fα = ω_βg).
    pub fn resonance(self) -> Exciton {
        match self {
            Echo::AlphaG | Echo::FBeta => Exciton::Alpha,
            Echo::BetaG | Echo::FAlpha => Exciton::Beta,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Echo::AlphaG => 0,
            Echo::BetaG => 1,
            Echo::FAlpha => 2,
            Echo::FBeta => 3,
        }
    }
}

/// One term of the signal: coefficient × χ_abcd(T), radiating from coherence `echo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathwayTerm {
    pub p: Exciton,
    pub q: Exciton,
    pub r: Exciton,
    pub echo: Echo,
    pub chi: (Level, Level, Level, Level),
    pub dipoles: [Dipole; 4],
    pub coefficient: Complex64,
}

impl PathwayTerm {
    pub fn m(&self) -> Exciton {
        self.p
    }

    pub fn n(&self) -> Exciton {
        self.echo.resonance()
    }

    /// True when the term links a population to a coherence in either direction.
    pub fn is_population_coherence(&self) -> bool {
        let (a, b, c, d) = self.chi;
        let pop = |x: Level, y: Level| x == y;
        let coh = |x: Level, y: Level| x != y && x != Level::G && y != Level::G;
        (pop(a, b) && coh(c, d)) || (coh(a, b) && pop(c, d))
    }
}

fn level(x: Exciton) -> Level {
    match x {
        Exciton::Alpha => Level::Alpha,
        Exciton::Beta => Level::Beta,
    }
}

fn other(x: Exciton) -> Exciton {
    match x {
        Exciton::Alpha => Exciton::Beta,
        Exciton::Beta => Exciton::Alpha,
    }
}

/// Third-pulse branch `r`: (dipole 3, dipole 4, echo, sign, output coherence |a⟩⟨b| or bleach).
fn branch(r: Exciton) -> [(Dipole, Dipole, Echo, Option<(Exciton, Exciton)>, f64); 4] {
    let s = other(r);
    let (rg, sg) = (Dipole::ground(r), Dipole::ground(s));
    let (f_r, f_s) = match r {
        Exciton::Alpha => (Dipole::FAlpha, Dipole::FBeta),
        Exciton::Beta => (Dipole::FBeta, Dipole::FAlpha),
    };
    let echo_of = |d: Dipole| match d {
        Dipole::AlphaG => Echo::AlphaG,
        Dipole::BetaG => Echo::BetaG,
        Dipole::FAlpha => Echo::FAlpha,
        Dipole::FBeta => Echo::FBeta,
    };
    [
        (rg, rg, echo_of(rg), None, 1.0),
        (f_s, f_s, echo_of(f_s), Some((s, s)), 1.0),
        (f_s, f_r, echo_of(f_r), Some((s, r)), 1.0),
        (rg, sg, echo_of(sg), Some((s, r)), -1.0),
    ]
}

/// Expands the rephasing signal into coefficient × χ terms.
///
/// Each coefficient already carries −i·C₁ᵖC₂ᵠC₃ʳ and the dipole factor, so that
/// S_mn(T) = Σ coefficient·χ over the terms with that (m, n).
pub fn pathway_terms(
    eigen: &EigenDimer,
    pulses: &PulseSequence,
    config: &PolarizationConfig,
    averaging: Averaging,
) -> Vec<PathwayTerm> {
    let coef = pulses.coefficients(eigen);
    let dip = |d: [Dipole; 4]| {
        let v = [d[0].vector(eigen), d[1].vector(eigen), d[2].vector(eigen), d[3].vector(eigen)];
        match averaging {
            Averaging::Isotropic => isotropic_average(v, config),
            Averaging::Fixed => oriented_product(v, config),
        }
    };
    let mut out = Vec::with_capacity(40);
    for p in Exciton::BOTH {
        for q in Exciton::BOTH {
            for r in Exciton::BOTH {
                let c = Complex64::new(0.0, -1.0)
                    * coef[0][p.index()]
                    * coef[1][q.index()]
                    * coef[2][r.index()];
                let (lq, lp) = (level(q), level(p));
                for (d3, d4, echo, out_state, sign) in branch(r) {
                    let dipoles = [Dipole::ground(p), Dipole::ground(q), d3, d4];
                    let w = c * dip(dipoles) * sign;
                    let mut push = |chi, scale: f64| {
                        out.push(PathwayTerm {
                            p,
                            q,
                            r,
                            echo,
                            chi,
                            dipoles,
                            coefficient: w * scale,
                        })
                    };
                    match out_state {
                        Some((a, b)) => push((level(a), level(b), lq, lp), 1.0),
                        None => {
                            // bleach and stimulated emission: χ_ggqp − δ_pq·χ_gggg − χ_rrqp
                            push((Level::G, Level::G, lq, lp), 1.0);
                            if p == q {
                                push((Level::G, Level::G, Level::G, Level::G), -1.0);
                            }
                            push((level(r), level(r), lq, lp), -1.0);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Peak amplitudes S_mn(T) from the full pathway sum.
pub fn peak_amplitudes_general(
    chi: &ProcessMatrix,
    eigen: &EigenDimer,
    pulses: &PulseSequence,
    config: &PolarizationConfig,
    averaging: Averaging,
) -> Result<PeakAmplitudeSet> {
    let terms = pathway_terms(eigen, pulses, config, averaging);
    let mut values = Vec::with_capacity(chi.len());
    for k in 0..chi.len() {
        let mut s = [[Complex64::new(0.0, 0.0); 2]; 2];
        for t in &terms {
            let (a, b, c, d) = t.chi;
            s[t.m().index()][t.n().index()] += t.coefficient * chi.entry(k, a, b, c, d)?;
        }
        values.push(s);
    }
    Ok(PeakAmplitudeSet {
        times: chi.times().to_vec(),
        values,
        config: config.tag.clone(),
        carriers: pulses.carriers(),
    })
}

use super::dephasing::DephasingSet;
use crate::error::{Error, Result};
use crate::exciton::{pulse_amplitude, EigenDimer, PulseSpec};
use num_complex::Complex64;
use std::fmt::Write as _;

/// Single-exciton labels indexing peaks and preparation branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exciton {
    Alpha,
    Beta,
}

impl Exciton {
    pub const BOTH: [Exciton; 2] = [Exciton::Alpha, Exciton::Beta];

    pub fn index(self) -> usize {
        match self {
            Exciton::Alpha => 0,
            Exciton::Beta => 1,
        }
    }

    pub fn label(self) -> char {
        match self {
            Exciton::Alpha => 'a',
            Exciton::Beta => 'b',
        }
    }

    pub fn energy(self, eigen: &EigenDimer) -> f64 {
        match self {
            Exciton::Alpha => eigen.omega_alpha,
            Exciton::Beta => eigen.omega_beta,
        }
    }
}

/// Three pulses plus the free-induction dephasing seen in the coherence and echo times.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub pulses: [PulseSpec; 3],
    pub dephasing: DephasingSet,
    /// Forces the Gaussian factor to one at both transitions.
    pub equal_amplitude: bool,
}

impl PulseSequence {
    /// Coefficients C[pulse][exciton].
    pub fn coefficients(&self, eigen: &EigenDimer) -> [[Complex64; 2]; 3] {
        std::array::from_fn(|i| {
            let p = &self.pulses[i];
            std::array::from_fn(|k| {
                if self.equal_amplitude {
                    p.resonant_amplitude()
                } else {
                    pulse_amplitude(p, Exciton::BOTH[k].energy(eigen))
                }
            })
        })
    }

    pub fn carriers(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.pulses[i].carrier)
    }
}

/// S_mn(T) per waiting time; `values[k][m][n]` with m, n indexed by [`Exciton::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeakAmplitudeSet {
    pub times: Vec<f64>,
    pub values: Vec<[[Complex64; 2]; 2]>,
    pub config: String,
    pub carriers: [f64; 3],
}

const CSV_HEADER: &str = "T_fs,S_aa_re,S_aa_im,S_ab_re,S_ab_im,S_ba_re,S_ba_im,S_bb_re,S_bb_im";

impl PeakAmplitudeSet {
    pub fn get(&self, k: usize, m: Exciton, n: Exciton) -> Complex64 {
        self.values[k][m.index()][n.index()]
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .flat_map(|v| v.iter().flatten())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for (t, v) in self.times.iter().zip(&self.values) {
            write!(s, "{t:.16e}").unwrap();
            for z in [v[0][0], v[0][1], v[1][0], v[1][1]] {
                write!(s, ",{:.16e},{:.16e}", z.re, z.im).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str, config: &str, carriers: [f64; 3]) -> Result<Self> {
        let bad = |msg: String| Error::Parse {
            file: "peak amplitude csv".into(),
            msg,
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(CSV_HEADER) {
            return Err(bad("unexpected header".into()));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let n: std::result::Result<Vec<f64>, _> = line.split(',').map(|x| x.trim().parse()).collect();
            let n = n.map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
            if n.len() != 9 {
                return Err(bad(format!("line {}: expected 9 fields", i + 2)));
            }
            times.push(n[0]);
            let z = |j: usize| Complex64::new(n[j], n[j + 1]);
            values.push([[z(1), z(3)], [z(5), z(7)]]);
        }
        Ok(PeakAmplitudeSet {
            times,
            values,
            config: config.to_string(),
            carriers,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let set = PeakAmplitudeSet {
            times: vec![23.75, 47.5],
            values: vec![
                [[Complex64::new(1.0 / 3.0, 0.0), Complex64::new(-0.1, 0.2)], [Complex64::new(1e-300, -7.0), Complex64::new(0.0, 0.0)]],
                [[Complex64::new(2f64.sqrt(), 1.0), Complex64::new(5.0, 6.0)], [Complex64::new(7.0, 8.0), Complex64::new(9.0, 1e10)]],
            ],
            config: "zzzz".into(),
            carriers: [16633.0; 3],
        };
        let back = PeakAmplitudeSet::from_csv(&set.to_csv(), "zzzz", [16633.0; 3]).unwrap();
        assert_eq!(back, set);
    }
}

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;

/// Electronic levels of the single-exciton block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    G,
    Alpha,
    Beta,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::Alpha, Level::Beta];

    pub fn index(self) -> usize {
        match self {
            Level::G => 0,
            Level::Alpha => 1,
            Level::Beta => 2,
        }
    }

    pub fn label(self) -> char {
        match self {
            Level::G => 'g',
            Level::Alpha => 'a',
            Level::Beta => 'b',
        }
    }

    pub fn from_label(c: char) -> Option<Level> {
        match c {
            'g' => Some(Level::G),
            'a' => Some(Level::Alpha),
            'b' => Some(Level::Beta),
            _ => None,
        }
    }
}

use Level::{Alpha as A, Beta as B, G};

/// Output coherences |a⟩⟨b|, row-major over `Level::ALL`.
pub const ROWS: [(Level, Level); 9] = [
    (G, G),
    (G, A),
    (G, B),
    (A, G),
    (A, A),
    (A, B),
    (B, G),
    (B, A),
    (B, B),
];

/// Tracked initial conditions |c⟩⟨d|.
pub const COLUMNS: [(Level, Level); 5] = [(G, G), (A, A), (B, B), (A, B), (B, A)];

const N: usize = 9 * 5;

fn row_index(a: Level, b: Level) -> usize {
    3 * a.index() + b.index()
}

fn col_index(c: Level, d: Level) -> Option<usize> {
    COLUMNS.iter().position(|&p| p == (c, d))
}

fn label4(a: Level, b: Level, c: Level, d: Level) -> String {
    [a, b, c, d].iter().map(|l| l.label()).collect()
}

/// χ_abcd(T_k) on a waiting-time grid. Entries outside the tracked columns are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    times: Vec<f64>,
    values: Vec<[Complex64; N]>,
}

impl ProcessMatrix {
    pub fn zeros(times: Vec<f64>) -> Self {
        let values = vec![[Complex64::new(0.0, 0.0); N]; times.len()];
        ProcessMatrix { times, values }
    }

    pub fn identity(times: Vec<f64>) -> Self {
        let mut chi = Self::zeros(times);
        for k in 0..chi.times.len() {
            for &(c, d) in &COLUMNS {
                chi.set(k, c, d, c, d, Complex64::new(1.0, 0.0));
            }
        }
        chi
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Entry χ_abcd at time index `k`; `None` for an untracked column.
    pub fn get(&self, k: usize, a: Level, b: Level, c: Level, d: Level) -> Option<Complex64> {
        col_index(c, d).map(|j| self.values[k][5 * row_index(a, b) + j])
    }

    pub fn entry(&self, k: usize, a: Level, b: Level, c: Level, d: Level) -> Result<Complex64> {
        self.get(k, a, b, c, d)
            .ok_or_else(|| Error::MissingChi(label4(a, b, c, d)))
    }

    /// Panics on an untracked column.
    pub fn set(&mut self, k: usize, a: Level, b: Level, c: Level, d: Level, v: Complex64) {
        let j = col_index(c, d).expect("untracked chi column");
        self.values[k][5 * row_index(a, b) + j] = v;
    }

    /// Slice holding only time index `k`.
    pub fn at(&self, k: usize) -> ProcessMatrix {
        ProcessMatrix {
            times: vec![self.times[k]],
            values: vec![self.values[k]],
        }
    }

    /// Applies `self` at index `k_first`, then `later` at index `k_later`.
    ///
    /// Fails if the first map leaks into rows outside the tracked columns, since
    /// `later` does not describe how those evolve.
    pub fn then(&self, k_first: usize, later: &ProcessMatrix, k_later: usize) -> Result<ProcessMatrix> {
        let time = self.times[k_first] + later.times[k_later];
        let mut out = ProcessMatrix::zeros(vec![time]);
        for &(c, d) in &COLUMNS {
            for &(e, f) in &ROWS {
                let x = self.get(k_first, e, f, c, d).unwrap();
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if col_index(e, f).is_none() {
                    return Err(Error::MissingChi(label4(e, f, c, d)));
                }
                for &(a, b) in &ROWS {
                    let y = later.get(k_later, a, b, e, f).unwrap();
                    let cur = out.get(0, a, b, c, d).unwrap();
                    out.set(0, a, b, c, d, cur + y * x);
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise distance to `other` (same grid assumed).
    pub fn max_abs_diff(&self, other: &ProcessMatrix) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| (p - q).norm()))
            .fold(0.0, f64::max)
    }

    pub fn csv_header() -> String {
        let mut h = String::from("T_fs");
        for &(c, d) in &COLUMNS {
            for &(a, b) in &ROWS {
                let l = label4(a, b, c, d);
                write!(h, ",chi_{l}_re,chi_{l}_im").unwrap();
            }
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut s = Self::csv_header();
        s.push('\n');
        for k in 0..self.len() {
            write!(s, "{:.16e}", self.times[k]).unwrap();
            for &(c, d) in &COLUMNS {
                for &(a, b) in &ROWS {
                    let v = self.get(k, a, b, c, d).unwrap();
                    write!(s, ",{:.16e},{:.16e}", v.re, v.im).unwrap();
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<ProcessMatrix> {
        let bad = |msg: String| Error::Parse {
            file: "chi csv".into(),
            msg,
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        if header.trim() != Self::csv_header() {
            return Err(bad("unexpected header".into()));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let nums: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let nums = nums.map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
            if nums.len() != 1 + 2 * N {
                return Err(bad(format!("line {}: expected {} fields", i + 2, 1 + 2 * N)));
            }
            times.push(nums[0]);
            let mut row = [Complex64::new(0.0, 0.0); N];
            let mut idx = 1;
            for (j, _) in COLUMNS.iter().enumerate() {
                for r in 0..9 {
                    row[5 * r + j] = Complex64::new(nums[idx], nums[idx + 1]);
                    idx += 2;
                }
            }
            values.push(row);
        }
        Ok(ProcessMatrix { times, values })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<ProcessMatrix> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::Parse {
                file: path.display().to_string(),
                msg,
            },
            other => other,
        })
    }
}

/// Largest constraint violations at one waiting time.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TimeViolations {
    pub time: f64,
    pub trace: f64,
    pub hermiticity: f64,
    pub ground: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConstraintReport {
    pub tol: f64,
    pub per_time: Vec<TimeViolations>,
}

impl ConstraintReport {
    pub fn max_trace(&self) -> f64 {
        self.per_time.iter().map(|v| v.trace).fold(0.0, f64::max)
    }

    pub fn max_hermiticity(&self) -> f64 {
        self.per_time.iter().map(|v| v.hermiticity).fold(0.0, f64::max)
    }

    pub fn max_ground(&self) -> f64 {
        self.per_time.iter().map(|v| v.ground).fold(0.0, f64::max)
    }

    /// Trace preservation and Hermiticity within `tol`.
    pub fn passes(&self) -> bool {
        self.max_trace() <= self.tol && self.max_hermiticity() <= self.tol
    }

    pub fn ground_inert(&self) -> bool {
        self.max_ground() <= self.tol
    }
}

pub fn validate_constraints(chi: &ProcessMatrix, tol: f64) -> ConstraintReport {
    let per_time = (0..chi.len())
        .map(|k| {
            let mut trace: f64 = 0.0;
            let mut herm: f64 = 0.0;
            let mut ground: f64 = 0.0;
            for &(c, d) in &COLUMNS {
                let mut t = Complex64::new(if c == d { -1.0 } else { 0.0 }, 0.0);
                for a in Level::ALL {
                    t += chi.get(k, a, a, c, d).unwrap();
                }
                trace = trace.max(t.norm());
                for &(a, b) in &ROWS {
                    let x = chi.get(k, a, b, c, d).unwrap();
                    let y = chi.get(k, b, a, d, c).unwrap();
                    herm = herm.max((x - y.conj()).norm());
                }
            }
            for &(a, b) in &ROWS {
                let want = if a == G && b == G { 1.0 } else { 0.0 };
                ground = ground.max((chi.get(k, a, b, G, G).unwrap() - want).norm());
            }
            TimeViolations {
                time: chi.times[k],
                trace,
                hermiticity: herm,
                ground,
            }
        })
        .collect();
    ConstraintReport { tol, per_time }
}

use super::process::{Level, ProcessMatrix, COLUMNS, ROWS};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type Operator = Matrix3<Complex64>;

/// Operator-sum representation on the {g, α, β} system space.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<Operator>,
}

impl KrausSet {
    pub const COMPLETENESS_TOL: f64 = 1e-10;

    pub fn new(operators: Vec<Operator>) -> Result<Self> {
        let set = KrausSet { operators };
        let dev = set.completeness_deviation();
        if !(dev <= Self::COMPLETENESS_TOL) {
            return Err(Error::IncompleteKraus(dev));
        }
        Ok(set)
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    /// max |Σ E†E − I|.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = Operator::zeros();
        for e in &self.operators {
            sum += e.adjoint() * e;
        }
        (sum - Operator::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Random complete set of `count` operators, from the blocks of a random isometry.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Self {
        assert!(count > 0);
        let rows = 3 * count;
        let v = DMatrix::<Complex64>::from_fn(rows, 3, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let q = v.qr().q();
        let operators = (0..count)
            .map(|k| Operator::from_fn(|i, j| q[(3 * k + i, j)]))
            .collect();
        KrausSet { operators }
    }
}

/// χ_abcd = Σ_k E_ac · conj(E_bd), labelled with waiting time `time`.
pub fn chi_from_kraus(set: &KrausSet, time: f64) -> Result<ProcessMatrix> {
    let dev = set.completeness_deviation();
    if !(dev <= KrausSet::COMPLETENESS_TOL) {
        return Err(Error::IncompleteKraus(dev));
    }
    let mut chi = ProcessMatrix::zeros(vec![time]);
    let idx = Level::index;
    for &(c, d) in &COLUMNS {
        for &(a, b) in &ROWS {
            let v: Complex64 = set
                .operators
                .iter()
                .map(|e| e[(idx(a), idx(c))] * e[(idx(b), idx(d))].conj())
                .sum();
            chi.set(0, a, b, c, d, v);
        }
    }
    Ok(chi)
}

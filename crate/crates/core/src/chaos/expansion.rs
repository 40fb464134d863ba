use nalgebra::DMatrix;
use rand_distr::StandardNormal;
use rand::Rng;

use super::{measurement_matrix, psi_multi, HermiteTables, MultiIndexSet};
use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Truncated chaos expansion `Σ_α c_α ψ_α`. Coefficients follow the order of
/// the index set, so `coefficients[0]` is always the mean.
#[derive(Debug, Clone)]
pub struct ChaosExpansion {
    index_set: MultiIndexSet,
    coefficients: Vec<f64>,
}

impl ChaosExpansion {
    pub fn new(index_set: MultiIndexSet, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != index_set.len() {
            return Err(Error::DimensionMismatch {
                expected: index_set.len(),
                actual: coefficients.len(),
                context: "coefficient count vs index set",
            });
        }
        Ok(ChaosExpansion {
            index_set,
            coefficients,
        })
    }

    pub fn zeros(index_set: MultiIndexSet) -> Self {
        let n = index_set.len();
        ChaosExpansion {
            index_set,
            coefficients: vec![0.0; n],
        }
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    pub fn dimension(&self) -> usize {
        self.index_set.dimension()
    }

    pub fn order(&self) -> usize {
        self.index_set.order()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.abs()).sum()
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        evaluate_expansion(self, point)
    }

    /// Evaluates at every row of `points`.
    pub fn evaluate_many(&self, points: &DMatrix<f64>) -> Result<Vec<f64>> {
        if points.nrows() == 0 {
            return Ok(Vec::new());
        }
        let psi = measurement_matrix(points, &self.index_set)?;
        let c = nalgebra::DVector::from_column_slice(&self.coefficients);
        Ok((psi * c).iter().copied().collect())
    }
}

pub fn evaluate_expansion(e: &ChaosExpansion, point: &[f64]) -> Result<f64> {
    if point.len() != e.dimension() {
        return Err(Error::DimensionMismatch {
            expected: e.dimension(),
            actual: point.len(),
            context: "point dimension vs expansion",
        });
    }
    if e.index_set.order() == 0 {
        return psi_multi(&e.index_set.indices()[0], point).map(|v| v * e.coefficients[0]);
    }
    let mut tables = HermiteTables::new(e.dimension(), e.order());
    tables.load(point.iter().copied());
    Ok(e.index_set
        .iter()
        .zip(&e.coefficients)
        .map(|(alpha, c)| c * tables.psi(alpha))
        .sum())
}

/// Mean and variance from orthonormality: the zero-index coefficient and the
/// sum of squares of the rest.
pub fn expansion_moments(e: &ChaosExpansion) -> (f64, f64) {
    let mean = e.coefficients.first().copied().unwrap_or(0.0);
    let variance = e.coefficients.iter().skip(1).map(|c| c * c).sum();
    (mean, variance)
}

/// Evaluates `e` at `n` i.i.d. standard Gaussian points drawn from a generator
/// seeded with `seed`.
pub fn sample_expansion(e: &ChaosExpansion, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let d = e.dimension();
    let mut tables = HermiteTables::new(d, e.order());
    let mut point = vec![0.0; d];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        for x in point.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        tables.load(point.iter().copied());
        out.push(
            e.index_set
                .iter()
                .zip(&e.coefficients)
                .map(|(alpha, c)| c * tables.psi(alpha))
                .sum(),
        );
    }
    Ok(out)
}

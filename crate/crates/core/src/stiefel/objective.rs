use nalgebra::DMatrix;

use super::ProjectionMatrix;
use crate::chaos::{HermiteTables, MultiIndexSet};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Misfit `J(W) = ‖u − Ψ_W c‖²` for fixed data, index set and coefficients.
pub struct MisfitModel<'a> {
    data: &'a Dataset,
    set: &'a MultiIndexSet,
    coefficients: &'a [f64],
}

impl<'a> MisfitModel<'a> {
    pub fn new(data: &'a Dataset, set: &'a MultiIndexSet, coefficients: &'a [f64]) -> Result<Self> {
        if coefficients.len() != set.len() {
            return Err(Error::DimensionMismatch {
                expected: set.len(),
                actual: coefficients.len(),
                context: "coefficients vs index set",
            });
        }
        Ok(MisfitModel {
            data,
            set,
            coefficients,
        })
    }

    fn check(&self, w: &DMatrix<f64>) -> Result<()> {
        if w.nrows() != self.set.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.set.dimension(),
                actual: w.nrows(),
                context: "projection rows vs index set",
            });
        }
        if w.ncols() != self.data.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.data.dimension(),
                actual: w.ncols(),
                context: "projection columns vs data",
            });
        }
        Ok(())
    }

    /// True when every coefficient except the constant term is zero, in which
    /// case `J` does not depend on `W`.
    pub fn is_constant(&self) -> bool {
        self.coefficients.iter().skip(1).all(|&c| c == 0.0)
    }

    pub fn value(&self, w: &DMatrix<f64>) -> Result<f64> {
        self.check(w)?;
        let eta = self.data.inputs() * w.transpose();
        let mut tables = HermiteTables::new(self.set.dimension(), self.set.order());
        let mut total = 0.0;
        for k in 0..eta.nrows() {
            tables.load(eta.row(k).iter().copied());
            let pred: f64 = self
                .set
                .iter()
                .zip(self.coefficients)
                .map(|(a, c)| c * tables.psi(a))
                .sum();
            let r = self.data.outputs()[k] - pred;
            total += r * r;
        }
        Ok(total)
    }

    /// `∂J/∂W_{ij} = −2 Σ_k r_k Σ_β c_β √β_i ψ_{β−e_i}(η_k) ξ_{kj}`.
    pub fn gradient(&self, w: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
        self.check(w)?;
        let d0 = self.set.dimension();
        let eta = self.data.inputs() * w.transpose();
        let mut tables = HermiteTables::new(d0, self.set.order());
        let mut psi = vec![0.0; self.set.len()];
        let mut dpsi = vec![0.0; d0];
        // weights[k, i] = −2 r_k ∂(Ψc)_k/∂η_i
        let mut weights = DMatrix::zeros(eta.nrows(), d0);
        let mut total = 0.0;
        for k in 0..eta.nrows() {
            tables.load(eta.row(k).iter().copied());
            for (slot, a) in psi.iter_mut().zip(self.set.iter()) {
                *slot = tables.psi(a);
            }
            let pred: f64 = psi.iter().zip(self.coefficients).map(|(p, c)| p * c).sum();
            let r = self.data.outputs()[k] - pred;
            total += r * r;
            dpsi.iter_mut().for_each(|v| *v = 0.0);
            for (j, (alpha, &c)) in self.set.iter().zip(self.coefficients).enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (i, slot) in dpsi.iter_mut().enumerate() {
                    if let Some(lower) = self.set.decrement(j, i) {
                        *slot += c * (alpha.entries()[i] as f64).sqrt() * psi[lower];
                    }
                }
            }
            for i in 0..d0 {
                weights[(k, i)] = -2.0 * r * dpsi[i];
            }
        }
        Ok((total, weights.transpose() * self.data.inputs()))
    }
}

pub fn l2_objective(
    w: &ProjectionMatrix,
    coefficients: &[f64],
    data: &Dataset,
    set: &MultiIndexSet,
) -> Result<f64> {
    MisfitModel::new(data, set, coefficients)?.value(w.matrix())
}

/// Euclidean gradient of `J` with respect to every entry of `W`, frozen rows included.
pub fn l2_gradient(
    w: &ProjectionMatrix,
    coefficients: &[f64],
    data: &Dataset,
    set: &MultiIndexSet,
) -> Result<DMatrix<f64>> {
    Ok(MisfitModel::new(data, set, coefficients)?.gradient(w.matrix())?.1)
}

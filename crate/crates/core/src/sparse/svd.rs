use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Thin SVD `Ψ = U S Vᵀ` restricted to the numerically nonzero singular values.
#[derive(Debug, Clone)]
pub struct SvdCache {
    u: DMatrix<f64>,
    singular: DVector<f64>,
    v_t: DMatrix<f64>,
    rows: usize,
    cols: usize,
}

impl SvdCache {
    pub fn new(matrix: &DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::InvalidArgument("empty measurement matrix".into()));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("measurement matrix has non-finite entries".into()));
        }
        let svd = matrix.clone().try_svd(true, true, f64::EPSILON, 0).ok_or(Error::SvdFailure)?;
        let u = svd.u.ok_or(Error::SvdFailure)?;
        let v_t = svd.v_t.ok_or(Error::SvdFailure)?;
        let s = svd.singular_values;
        let smax = s.iter().copied().fold(0.0, f64::max);
        let cutoff = smax * matrix.nrows().max(matrix.ncols()) as f64 * f64::EPSILON;
        let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > cutoff).collect();
        Ok(SvdCache {
            u: u.select_columns(keep.iter()),
            singular: DVector::from_iterator(keep.len(), keep.iter().map(|&i| s[i])),
            v_t: v_t.select_rows(keep.iter()),
            rows: matrix.nrows(),
            cols: matrix.ncols(),
        })
    }

    pub fn rank(&self) -> usize {
        self.singular.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular
    }

    pub(crate) fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub(crate) fn v_t(&self) -> &DMatrix<f64> {
        &self.v_t
    }

    /// Minimum-norm least-squares solution `V S⁻¹ Uᵀ u`.
    pub fn pseudo_solve(&self, observations: &DVector<f64>) -> DVector<f64> {
        let mut b = self.u.tr_mul(observations);
        b.component_div_assign(&self.singular);
        self.v_t.tr_mul(&b)
    }

    /// `‖u − U Uᵀ u‖`, the smallest residual any coefficient vector can reach.
    pub fn residual_floor(&self, observations: &DVector<f64>) -> f64 {
        let b = self.u.tr_mul(observations);
        (observations - &self.u * b).norm()
    }
}

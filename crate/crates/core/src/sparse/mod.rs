//! ℓ1-minimization with a residual constraint (basis pursuit denoising) by
//! Douglas–Rachford splitting, plus least squares.

mod dr;
mod projection;
mod svd;

pub use dr::{solve_bpdn, BpdnProblem, BpdnSolution, BpdnSolver, DrConfig};
pub use projection::{project_residual_ball, BallProjector};
pub use svd::SvdCache;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Componentwise `sign(v_i) max(|v_i| − t, 0)`.
pub fn soft_threshold(v: &DVector<f64>, t: f64) -> DVector<f64> {
    let mut out = v.clone();
    soft_threshold_in_place(&mut out, t);
    out
}

pub(crate) fn soft_threshold_in_place(v: &mut DVector<f64>, t: f64) {
    for x in v.iter_mut() {
        let m = x.abs() - t;
        *x = if m > 0.0 { x.signum() * m } else { 0.0 };
    }
}

/// Minimum-norm least-squares solution via the SVD pseudo-inverse.
pub fn solve_ols(matrix: &DMatrix<f64>, observations: &DVector<f64>) -> Result<DVector<f64>> {
    if matrix.nrows() != observations.len() {
        return Err(Error::DimensionMismatch {
            expected: matrix.nrows(),
            actual: observations.len(),
            context: "measurement rows vs observations",
        });
    }
    Ok(SvdCache::new(matrix)?.pseudo_solve(observations))
}

/// `‖u − Ψc‖₂`.
pub fn residual_norm(matrix: &DMatrix<f64>, c: &DVector<f64>, observations: &DVector<f64>) -> Result<f64> {
    if matrix.ncols() != c.len() || matrix.nrows() != observations.len() {
        return Err(Error::DimensionMismatch {
            expected: matrix.ncols(),
            actual: c.len(),
            context: "residual shapes",
        });
    }
    Ok((observations - matrix * c).norm())
}

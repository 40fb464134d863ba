//! Hermite chaos basis: multi-indices, normalized Hermite polynomials,
//! measurement matrices and expansions.

mod expansion;
mod hermite;
mod multiindex;

pub use expansion::{evaluate_expansion, expansion_moments, sample_expansion, ChaosExpansion};
pub use hermite::{hermite_normalized, hermite_normalized_derivative, hermite_table};
pub use multiindex::{count_basis, MultiIndex, MultiIndexSet};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::stiefel::ProjectionMatrix;

/// Enumerates 𝒥_Q^d in graded lexicographic order.
pub fn enumerate_multiindices(dimension: usize, order: usize) -> Result<MultiIndexSet> {
    MultiIndexSet::total_degree(dimension, order)
}

/// Tensor-product basis value `ψ_α(x) = Π ψ_{α_i}(x_i)`.
pub fn psi_multi(alpha: &MultiIndex, point: &[f64]) -> Result<f64> {
    if alpha.dimension() != point.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dimension(),
            actual: point.len(),
            context: "multi-index vs point",
        });
    }
    Ok(alpha
        .entries()
        .iter()
        .zip(point)
        .map(|(&n, &x)| hermite_normalized(n as usize, x))
        .product())
}

/// Reusable per-point table of `ψ_n(x_i)` for `n ≤ Q`, laid out row-major by dimension.
pub(crate) struct HermiteTables {
    stride: usize,
    values: Vec<f64>,
}

impl HermiteTables {
    pub(crate) fn new(dimension: usize, order: usize) -> Self {
        HermiteTables {
            stride: order + 1,
            values: vec![0.0; dimension * (order + 1)],
        }
    }

    pub(crate) fn load(&mut self, point: impl Iterator<Item = f64>) {
        for (i, x) in point.enumerate() {
            hermite_table(x, &mut self.values[i * self.stride..(i + 1) * self.stride]);
        }
    }

    #[inline]
    pub(crate) fn psi(&self, alpha: &MultiIndex) -> f64 {
        let mut acc = 1.0;
        for (i, &n) in alpha.entries().iter().enumerate() {
            if n > 0 {
                acc *= self.values[i * self.stride + n as usize];
            }
        }
        acc
    }
}

/// `Ψ_{ij} = ψ_j(x^{(i)})` with one point per row of `points`.
pub fn measurement_matrix(points: &DMatrix<f64>, set: &MultiIndexSet) -> Result<DMatrix<f64>> {
    if points.nrows() == 0 {
        return Err(Error::InvalidArgument("measurement matrix needs at least one point".into()));
    }
    if points.ncols() != set.dimension() {
        return Err(Error::DimensionMismatch {
            expected: set.dimension(),
            actual: points.ncols(),
            context: "point dimension vs index set",
        });
    }
    let mut psi = DMatrix::zeros(points.nrows(), set.len());
    let mut tables = HermiteTables::new(set.dimension(), set.order());
    for i in 0..points.nrows() {
        tables.load(points.row(i).iter().copied());
        for (j, alpha) in set.iter().enumerate() {
            psi[(i, j)] = tables.psi(alpha);
        }
    }
    Ok(psi)
}

/// Maps every row `ξ` of `points` to `η = Wξ`.
pub fn project_points(w: &ProjectionMatrix, points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if points.ncols() != w.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: w.input_dim(),
            actual: points.ncols(),
            context: "point dimension vs projection columns",
        });
    }
    Ok(points * w.matrix().transpose())
}

/// `Ψ_W` with entries `ψ_j(W ξ^{(i)})`.
pub fn rotated_measurement_matrix(
    w: &ProjectionMatrix,
    points: &DMatrix<f64>,
    set: &MultiIndexSet,
) -> Result<DMatrix<f64>> {
    if w.reduced_dim() != set.dimension() {
        return Err(Error::DimensionMismatch {
            expected: set.dimension(),
            actual: w.reduced_dim(),
            context: "projection rows vs index set",
        });
    }
    measurement_matrix(&project_points(w, points)?, set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Gauss–Hermite nodes and weights for the standard normal measure via
    /// Golub–Welsch on the Jacobi matrix of the normalized recurrence.
    fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut jac = DMatrix::zeros(n, n);
        for k in 1..n {
            let b = (k as f64).sqrt();
            jac[(k, k - 1)] = b;
            jac[(k - 1, k)] = b;
        }
        let eig = jac.symmetric_eigen();
        let nodes = eig.eigenvalues.iter().copied().collect();
        let weights = (0..n).map(|k| eig.eigenvectors[(0, k)].powi(2)).collect();
        (nodes, weights)
    }

    #[test]
    fn tensor_basis_values() {
        let zero = MultiIndex::zero(4);
        assert_eq!(psi_multi(&zero, &[0.3, -1.0, 7.0, 2.0]).unwrap(), 1.0);
        let a = MultiIndex::new(vec![2, 0]);
        assert_relative_eq!(psi_multi(&a, &[0.0, 5.0]).unwrap(), -1.0 / 2f64.sqrt(), epsilon = 1e-15);
        let b = MultiIndex::new(vec![1, 1]);
        assert_relative_eq!(psi_multi(&b, &[1.7, -0.4]).unwrap(), 1.7 * -0.4, epsilon = 1e-15);
        assert!(psi_multi(&b, &[1.0]).is_err());
    }

    #[test]
    fn measurement_matrix_rows() {
        let set = enumerate_multiindices(1, 2).unwrap();
        let pts = DMatrix::from_row_slice(1, 1, &[0.0]);
        let psi = measurement_matrix(&pts, &set).unwrap();
        assert_eq!(psi.row(0).iter().copied().collect::<Vec<_>>().len(), 3);
        assert_eq!(psi[(0, 0)], 1.0);
        assert_eq!(psi[(0, 1)], 0.0);
        assert_relative_eq!(psi[(0, 2)], -1.0 / 2f64.sqrt(), epsilon = 1e-15);

        let set0 = enumerate_multiindices(3, 0).unwrap();
        let pts = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 9.0]);
        let psi = measurement_matrix(&pts, &set0).unwrap();
        assert_eq!(psi, DMatrix::from_element(2, 1, 1.0));

        let empty = DMatrix::<f64>::zeros(0, 3);
        assert!(measurement_matrix(&empty, &set0).is_err());
    }

    #[test]
    fn rotated_matrix_with_identity_and_truncation() {
        let pts = DMatrix::from_fn(6, 3, |i, j| ((i * 3 + j) as f64 * 0.37).sin() * 2.0);
        let set3 = enumerate_multiindices(3, 3).unwrap();
        let ident = ProjectionMatrix::new(DMatrix::identity(3, 3), 0).unwrap();
        assert_eq!(
            rotated_measurement_matrix(&ident, &pts, &set3).unwrap(),
            measurement_matrix(&pts, &set3).unwrap()
        );

        let set2 = enumerate_multiindices(2, 3).unwrap();
        let first_two = ProjectionMatrix::new(DMatrix::identity(2, 3), 0).unwrap();
        let restricted = pts.columns(0, 2).into_owned();
        assert_eq!(
            rotated_measurement_matrix(&first_two, &pts, &set2).unwrap(),
            measurement_matrix(&restricted, &set2).unwrap()
        );
        assert!(rotated_measurement_matrix(&first_two, &pts, &set3).is_err());
    }

    #[test]
    fn orthonormality_by_gauss_hermite_quadrature() {
        for d in 1..=3usize {
            for q in 0..=5usize {
                let set = enumerate_multiindices(d, q).unwrap();
                let (nodes, weights) = gauss_hermite(q + 1);
                let m = nodes.len();
                let total = m.pow(d as u32);
                let mut gram = DMatrix::<f64>::zeros(set.len(), set.len());
                let mut point = vec![0.0; d];
                for flat in 0..total {
                    let mut rem = flat;
                    let mut w = 1.0;
                    for slot in point.iter_mut() {
                        *slot = nodes[rem % m];
                        w *= weights[rem % m];
                        rem /= m;
                    }
                    let vals: Vec<f64> = set.iter().map(|a| psi_multi(a, &point).unwrap()).collect();
                    for a in 0..set.len() {
                        for b in 0..set.len() {
                            gram[(a, b)] += w * vals[a] * vals[b];
                        }
                    }
                }
                let err = (gram - DMatrix::identity(set.len(), set.len())).amax();
                assert!(err < 1e-10, "d={d} q={q} err={err}");
            }
        }
    }
}

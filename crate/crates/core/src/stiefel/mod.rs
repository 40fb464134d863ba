//! Row-orthonormal projection matrices and ℓ2 misfit minimization over them.

mod objective;
mod optimize;

pub use objective::{l2_gradient, l2_objective, MisfitModel};
pub use optimize::{optimize_rotation, RotationOptConfig, RotationOutcome};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Tolerance on `‖W Wᵀ − I‖_F` for a matrix to count as row-orthonormal.
pub const STIEFEL_TOLERANCE: f64 = 1e-10;

/// `d₀ × d` matrix `W` with orthonormal rows. The first `fixed_rows` rows are
/// frozen during optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    matrix: DMatrix<f64>,
    fixed_rows: usize,
}

impl ProjectionMatrix {
    pub fn new(matrix: DMatrix<f64>, fixed_rows: usize) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() > matrix.ncols() {
            return Err(Error::InvalidArgument(format!(
                "projection must have 1 ≤ rows ≤ columns, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if fixed_rows > matrix.nrows() {
            return Err(Error::InvalidArgument("more frozen rows than rows".into()));
        }
        let p = ProjectionMatrix { matrix, fixed_rows };
        let err = p.orthonormality_error();
        if !(err < STIEFEL_TOLERANCE) {
            return Err(Error::InvalidArgument(format!(
                "rows are not orthonormal (‖WWᵀ − I‖_F = {err:e})"
            )));
        }
        Ok(p)
    }

    pub(crate) fn from_parts_unchecked(matrix: DMatrix<f64>, fixed_rows: usize) -> Self {
        ProjectionMatrix { matrix, fixed_rows }
    }

    /// First `reduced` rows of the `d × d` identity.
    pub fn identity(reduced: usize, input: usize) -> Result<Self> {
        ProjectionMatrix::new(DMatrix::identity(reduced, input), 0)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn reduced_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn fixed_rows(&self) -> usize {
        self.fixed_rows
    }

    pub fn with_fixed_rows(mut self, fixed_rows: usize) -> Self {
        self.fixed_rows = fixed_rows.min(self.matrix.nrows());
        self
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.matrix.row(i).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.reduced_dim()).map(|i| self.row(i)).collect()
    }

    pub fn orthonormality_error(&self) -> f64 {
        let g = &self.matrix * self.matrix.transpose();
        (g - DMatrix::identity(self.reduced_dim(), self.reduced_dim())).norm()
    }
}

/// Orthonormalizes the free rows of `m` (rows `fixed_rows..`) against the
/// frozen leading block and each other; frozen rows are copied verbatim.
/// Each free row is flipped so its largest-magnitude entry is non-negative.
pub fn retract(m: &DMatrix<f64>, fixed_rows: usize) -> Result<ProjectionMatrix> {
    retract_rows(m, fixed_rows, true)
}

pub(crate) fn retract_rows(
    m: &DMatrix<f64>,
    fixed_rows: usize,
    canonical_sign: bool,
) -> Result<ProjectionMatrix> {
    if fixed_rows > m.nrows() || m.nrows() > m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "cannot retract a {}×{} matrix with {fixed_rows} frozen rows",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut out = m.clone();
    for r in fixed_rows..m.nrows() {
        let original = m.row(r).norm();
        let mut row = m.row(r).into_owned();
        // two Gram–Schmidt sweeps: the second repairs cancellation from the first
        for _ in 0..2 {
            for k in 0..r {
                let proj = row.dot(&out.row(k));
                row -= proj * out.row(k);
            }
        }
        let norm = row.norm();
        if !(norm > 1e-10 * original.max(f64::MIN_POSITIVE)) || !norm.is_finite() {
            return Err(Error::RankCollapse { row: r });
        }
        row /= norm;
        if canonical_sign {
            if row[leading_entry(row.iter())] < 0.0 {
                row.neg_mut();
            }
        }
        out.set_row(r, &row);
    }
    Ok(ProjectionMatrix::from_parts_unchecked(out, fixed_rows))
}

/// Position of the first entry of largest magnitude.
fn leading_entry<'a>(values: impl Iterator<Item = &'a f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v.abs() > best.1 {
            best = (i, v.abs());
        }
    }
    best.0
}

/// Flips free rows to the sign convention and reports which rows flipped.
pub(crate) fn canonicalize_signs(w: &ProjectionMatrix) -> (ProjectionMatrix, Vec<bool>) {
    let mut m = w.matrix.clone();
    let mut flipped = vec![false; m.nrows()];
    for r in w.fixed_rows..m.nrows() {
        if m[(r, leading_entry(m.row(r).iter()))] < 0.0 {
            let neg = -m.row(r).into_owned();
            m.set_row(r, &neg);
            flipped[r] = true;
        }
    }
    (ProjectionMatrix::from_parts_unchecked(m, w.fixed_rows), flipped)
}

/// Random row-orthonormal `d₀ × d` matrix. When `frozen` is given its rows are
/// kept as the leading block and `d₀ − frozen rows` Gaussian rows are appended.
pub fn random_stiefel(
    input_dim: usize,
    new_rows: usize,
    frozen: Option<&ProjectionMatrix>,
    seed: u64,
) -> Result<ProjectionMatrix> {
    let fixed = frozen.map_or(0, |f| f.reduced_dim());
    if new_rows == 0 || fixed + new_rows > input_dim {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {new_rows} new rows in dimension {input_dim} with {fixed} frozen rows"
        )));
    }
    if let Some(f) = frozen {
        if f.input_dim() != input_dim {
            return Err(Error::DimensionMismatch {
                expected: input_dim,
                actual: f.input_dim(),
                context: "frozen block columns",
            });
        }
    }
    let mut rng = seeded_rng(seed);
    let mut last = None;
    for _ in 0..10 {
        let mut m = DMatrix::zeros(fixed + new_rows, input_dim);
        if let Some(f) = frozen {
            m.rows_mut(0, fixed).copy_from(f.matrix());
        }
        for r in fixed..fixed + new_rows {
            for c in 0..input_dim {
                m[(r, c)] = rng.sample(StandardNormal);
            }
        }
        match retract(&m, fixed) {
            Ok(p) => return Ok(p),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or(Error::RankCollapse { row: fixed }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retract_normalizes_and_orthogonalizes() {
        let m = DMatrix::from_row_slice(1, 2, &[2.0, 0.0]);
        assert_eq!(retract(&m, 0).unwrap().matrix(), &DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));

        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        let p = retract(&m, 1).unwrap();
        assert_eq!(p.row(0), vec![1.0, 0.0, 0.0]);
        assert!((p.row(1)[1] - 1.0).abs() < 1e-15);
        assert!(p.row(1)[0].abs() < 1e-15 && p.row(1)[2].abs() < 1e-15);

        let m = DMatrix::from_row_slice(1, 2, &[0.6, -0.8]);
        assert_eq!(retract(&m, 0).unwrap().row(0), vec![-0.6, 0.8]);
    }

    #[test]
    fn retract_keeps_orthonormal_input() {
        let s = 0.5f64.sqrt();
        let m = DMatrix::from_row_slice(2, 2, &[s, s, s, -s]);
        let p = retract(&m, 0).unwrap();
        assert!((p.matrix() - &m).amax() < 1e-15);
        let flipped = DMatrix::from_row_slice(2, 2, &[-s, -s, -s, s]);
        assert!((retract(&flipped, 0).unwrap().matrix() - &m).amax() < 1e-15);
    }

    #[test]
    fn retract_rank_collapse() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!(matches!(retract(&m, 1), Err(Error::RankCollapse { row: 1 })));
    }

    #[test]
    fn random_rows() {
        let w = random_stiefel(3, 1, None, 4).unwrap();
        assert!((w.matrix().row(0).norm() - 1.0).abs() < 1e-12);
        assert_eq!(w, random_stiefel(3, 1, None, 4).unwrap());

        let e1 = ProjectionMatrix::identity(1, 5).unwrap();
        let w = random_stiefel(5, 2, Some(&e1), 11).unwrap();
        assert_eq!(w.reduced_dim(), 3);
        assert_eq!(w.row(0), e1.row(0));
        assert!(w.matrix()[(1, 0)].abs() < 1e-12 && w.matrix()[(2, 0)].abs() < 1e-12);
        assert!(w.orthonormality_error() < 1e-12);
        assert!(random_stiefel(3, 3, Some(&e1.clone().with_fixed_rows(1)), 1).is_err());
    }

    #[test]
    fn constructor_validates() {
        assert!(ProjectionMatrix::new(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), 0).is_err());
        assert!(ProjectionMatrix::new(DMatrix::identity(3, 2), 0).is_err());
        let d = 12.0f64;
        let w = DMatrix::from_element(1, 12, 1.0 / d.sqrt());
        assert!(ProjectionMatrix::new(w, 0).is_ok());
    }
}

#![allow(dead_code)]

use chaosadapt::chaos::{enumerate_multiindices, measurement_matrix, MultiIndexSet};
use chaosadapt::crossval::{default_grid, split_dataset, training_size};
use chaosadapt::rng::{gaussian_matrix, seeded_rng};
use chaosadapt::sparse::{solve_bpdn, BpdnProblem, DrConfig};
use chaosadapt::stiefel::{l2_gradient, random_stiefel, MisfitModel, ProjectionMatrix};
use chaosadapt::Dataset;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Random data, projection and coefficients for misfit checks.
pub struct MisfitInstance {
    pub data: Dataset,
    pub w: ProjectionMatrix,
    pub set: MultiIndexSet,
    pub c: Vec<f64>,
}

pub fn misfit_instance(seed: u64, d: usize, reduced: usize, order: usize, n: usize) -> MisfitInstance {
    let mut rng = seeded_rng(seed);
    let x = gaussian_matrix(&mut rng, n, d);
    let u = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(-2.0..2.0)));
    let data = Dataset::new(x, u).unwrap();
    let set = enumerate_multiindices(reduced, order).unwrap();
    let c = (0..set.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let w = random_stiefel(d, reduced, None, seed ^ 0x5eed).unwrap();
    MisfitInstance { data, w, set, c }
}

/// `‖g − g_fd‖ / ‖g‖` with central differences of step `h`.
pub fn gradient_relative_error(inst: &MisfitInstance, h: f64) -> f64 {
    let g = l2_gradient(&inst.w, &inst.c, &inst.data, &inst.set).unwrap();
    let base = inst.w.matrix().clone();
    let mut fd = DMatrix::zeros(base.nrows(), base.ncols());
    let model = MisfitModel::new(&inst.data, &inst.set, &inst.c).unwrap();
    let eval = |m: DMatrix<f64>| model.value(&m).unwrap();
    for i in 0..base.nrows() {
        for j in 0..base.ncols() {
            let mut plus = base.clone();
            plus[(i, j)] += h;
            let mut minus = base.clone();
            minus[(i, j)] -= h;
            fd[(i, j)] = (eval(plus) - eval(minus)) / (2.0 * h);
        }
    }
    (&g - &fd).norm() / g.norm().max(f64::MIN_POSITIVE)
}

/// Haar-ish random orthogonal `k × k` matrix via QR of a Gaussian matrix.
pub fn random_orthogonal(k: usize, seed: u64) -> DMatrix<f64> {
    let g = gaussian_matrix(&mut seeded_rng(seed), k, k);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Least-squares residual norm of `u` against the columns of `m`.
pub fn ls_residual(m: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    let svd = m.clone().svd(true, true);
    let c = svd.solve(u, 1e-12).unwrap();
    (u - m * c).norm()
}

/// Plain re-statement of the tolerance selection: split, fit every grid value
/// on the training rows, score on the held-out rows, rescale the minimum.
pub fn straight_line_crossval(
    data: &Dataset,
    set: &MultiIndexSet,
    count: usize,
    fraction: f64,
    seed: u64,
    dr: &DrConfig,
) -> f64 {
    let n_train = training_size(data.len(), fraction);
    let (train, valid) = split_dataset(data, n_train, seed).unwrap();
    let psi_train = measurement_matrix(train.inputs(), set).unwrap();
    let psi_valid = measurement_matrix(valid.inputs(), set).unwrap();
    let mut best = f64::INFINITY;
    for eps in default_grid(train.outputs().norm(), count) {
        let problem = BpdnProblem {
            matrix: psi_train.clone(),
            observations: train.outputs().clone(),
            epsilon: eps,
        };
        let Ok(sol) = solve_bpdn(&problem, dr, None) else {
            continue;
        };
        let err = (valid.outputs() - &psi_valid * &sol.coefficients).norm();
        if err < best {
            best = err;
        }
    }
    best * (data.len() as f64 / n_train as f64).sqrt()
}

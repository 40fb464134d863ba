//! Selection of the fit tolerance `ε` from one training/validation split.

use log::warn;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{measurement_matrix, rotated_measurement_matrix, MultiIndexSet};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use crate::sparse::{BpdnSolver, DrConfig};
use crate::stiefel::ProjectionMatrix;

pub const DEFAULT_GRID_SIZE: usize = 12;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValReport {
    /// Feasible training tolerances that were solved, ascending.
    pub epsilon_grid: Vec<f64>,
    /// `‖u_v − Ψ_v c_tr‖` for each entry of `epsilon_grid`.
    pub validation_errors: Vec<f64>,
    /// Grid values below the training residual floor.
    pub skipped: Vec<f64>,
    pub training_floor: f64,
    pub min_validation_error: f64,
    /// Training tolerance at the minimal validation error, kept for comparison.
    pub argmin_epsilon: f64,
    /// `√(N/N_tr) · min_j ε_v^j`.
    pub selected_epsilon: f64,
    pub split_seed: u64,
    pub n_train: usize,
    pub n_valid: usize,
}

/// Rescaling of the minimal validation error to the full data size.
pub fn scaled_epsilon(n: usize, n_train: usize, min_validation_error: f64) -> f64 {
    (n as f64 / n_train as f64).sqrt() * min_validation_error
}

/// `ceil(fraction · N)` clamped to `[1, N − 1]`.
pub fn training_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).ceil() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// `count` log-spaced values over `[1e-4, 1] · scale`.
pub fn default_grid(scale: f64, count: usize) -> Vec<f64> {
    log_grid(1e-4 * scale, scale, count)
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![hi],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|j| (a + (b - a) * j as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

/// Random partition into `n_train` training rows and the rest.
pub fn split_dataset(data: &Dataset, n_train: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if n_train == 0 || n_train >= data.len() {
        return Err(Error::InvalidArgument(format!(
            "training size must lie in [1, {}), got {n_train}",
            data.len()
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut seeded_rng(seed));
    let (train, valid) = order.split_at(n_train);
    Ok((data.select(train)?, data.select(valid)?))
}

/// Tolerance grid for `select_epsilon`: explicit values or the default span
/// relative to the training data norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonGrid {
    Explicit(Vec<f64>),
    RelativeToData { count: usize },
}

impl Default for EpsilonGrid {
    fn default() -> Self {
        EpsilonGrid::RelativeToData {
            count: DEFAULT_GRID_SIZE,
        }
    }
}

/// For each grid tolerance, solves the constrained ℓ1 problem on the training
/// split and measures the validation residual; returns the minimal validation
/// residual rescaled by `√(N/N_tr)`.
pub fn select_epsilon(
    data: &Dataset,
    projection: Option<&ProjectionMatrix>,
    set: &MultiIndexSet,
    grid: &EpsilonGrid,
    train_fraction: f64,
    seed: u64,
    dr: &DrConfig,
) -> Result<CrossValReport> {
    if data.len() < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least two samples".into()));
    }
    let n_train = training_size(data.len(), train_fraction);
    let (train, valid) = split_dataset(data, n_train, seed)?;
    let design = |d: &Dataset| match projection {
        Some(w) => rotated_measurement_matrix(w, d.inputs(), set),
        None => measurement_matrix(d.inputs(), set),
    };
    let solver = BpdnSolver::new(design(&train)?, train.outputs().clone())?;
    let psi_valid = design(&valid)?;

    let values = match grid {
        EpsilonGrid::Explicit(v) => v.clone(),
        EpsilonGrid::RelativeToData { count } => default_grid(train.outputs().norm(), *count),
    };
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty epsilon grid".into()));
    }
    if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("epsilon grid must be positive and strictly increasing".into()));
    }
    let floor = solver.residual_floor();
    let (feasible, skipped): (Vec<f64>, Vec<f64>) = values.iter().partition(|&&e| solver.is_feasible(e));
    if !skipped.is_empty() {
        warn!(
            "skipping {} epsilon value(s) below the training residual floor {floor:e}",
            skipped.len()
        );
    }
    if feasible.is_empty() {
        return Err(Error::AllGridInfeasible { floor });
    }
    let errors: Vec<f64> = feasible
        .par_iter()
        .map(|&eps| -> Result<f64> {
            let c = solver.solve(eps, dr, None)?.coefficients;
            Ok((valid.outputs() - &psi_valid * c).norm())
        })
        .collect::<Result<_>>()?;

    let (best, min_err) = errors
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (j, e)| if e < acc.1 { (j, e) } else { acc });
    Ok(CrossValReport {
        argmin_epsilon: feasible[best],
        selected_epsilon: scaled_epsilon(data.len(), n_train, min_err),
        min_validation_error: min_err,
        epsilon_grid: feasible,
        validation_errors: errors,
        skipped,
        training_floor: floor,
        split_seed: seed,
        n_train,
        n_valid: data.len() - n_train,
    })
}

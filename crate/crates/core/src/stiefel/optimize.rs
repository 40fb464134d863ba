use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{retract_rows, MisfitModel, ProjectionMatrix};
use crate::chaos::MultiIndexSet;
use crate::dataset::Dataset;
use crate::error::Result;

/// Projected gradient descent with Armijo backtracking on the free rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RotationOptConfig {
    pub max_iterations: usize,
    /// Stop once the tangent-space gradient norm falls to this value.
    pub gradient_tolerance: f64,
    /// Length (Frobenius norm) of the first trial step.
    pub initial_step: f64,
    pub shrink_factor: f64,
    pub sufficient_decrease: f64,
    pub max_shrinks: usize,
}

impl Default for RotationOptConfig {
    fn default() -> Self {
        RotationOptConfig {
            max_iterations: 200,
            gradient_tolerance: 1e-8,
            initial_step: 0.5,
            shrink_factor: 0.5,
            sufficient_decrease: 1e-4,
            max_shrinks: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RotationOutcome {
    pub projection: ProjectionMatrix,
    /// Accepted objective values, starting with `J(W0)`.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Line search exhausted `max_shrinks` without sufficient decrease.
    pub stalled: bool,
}

/// Tangent-space projection of `grad` for the free rows `x`, which must stay
/// orthonormal and orthogonal to the frozen rows `frozen`.
fn tangent_direction(grad: &DMatrix<f64>, x: &DMatrix<f64>, frozen: &DMatrix<f64>) -> DMatrix<f64> {
    let mut g = grad.clone();
    if frozen.nrows() > 0 {
        g -= (&g * frozen.transpose()) * frozen;
    }
    let gx = &g * x.transpose();
    let sym = (&gx + gx.transpose()) * 0.5;
    g - sym * x
}

/// Minimizes `‖u − Ψ_W c‖²` over the free rows of `w0` with `c` held fixed.
pub fn optimize_rotation(
    w0: &ProjectionMatrix,
    coefficients: &[f64],
    data: &Dataset,
    set: &MultiIndexSet,
    config: &RotationOptConfig,
) -> Result<RotationOutcome> {
    let model = MisfitModel::new(data, set, coefficients)?;
    let fixed = w0.fixed_rows();
    let rows = w0.reduced_dim();
    let mut w = w0.matrix().clone();
    let mut value = model.value(&w)?;
    let mut trace = vec![value];
    let done = |iterations, gradient_norm, w: DMatrix<f64>, trace, stalled| RotationOutcome {
        projection: ProjectionMatrix::from_parts_unchecked(w, fixed),
        objective_trace: trace,
        iterations,
        gradient_norm,
        stalled,
    };
    if fixed == rows || model.is_constant() || value == 0.0 {
        return Ok(done(0, 0.0, w, trace, false));
    }

    let frozen = w.rows(0, fixed).into_owned();
    let mut step = config.initial_step;
    let mut gradient_norm = f64::INFINITY;
    for it in 0..config.max_iterations {
        let (_, grad) = model.gradient(&w)?;
        let free = w.rows(fixed, rows - fixed).into_owned();
        let dir = tangent_direction(&grad.rows(fixed, rows - fixed).into_owned(), &free, &frozen);
        gradient_norm = dir.norm();
        if !(gradient_norm > config.gradient_tolerance) {
            return Ok(done(it, gradient_norm, w, trace, false));
        }
        let unit = &dir / gradient_norm;
        let mut accepted = false;
        for _ in 0..config.max_shrinks {
            let mut trial = w.clone();
            let moved = &free - &unit * step;
            trial.rows_mut(fixed, rows - fixed).copy_from(&moved);
            let Ok(candidate) = retract_rows(&trial, fixed, false) else {
                step *= config.shrink_factor;
                continue;
            };
            let trial_value = model.value(candidate.matrix())?;
            if trial_value <= value - config.sufficient_decrease * step * gradient_norm {
                let mut next = candidate.into_matrix();
                // frozen rows are carried bit-for-bit
                next.rows_mut(0, fixed).copy_from(&frozen);
                w = next;
                value = trial_value;
                trace.push(value);
                accepted = true;
                break;
            }
            step *= config.shrink_factor;
        }
        if !accepted {
            return Ok(done(it, gradient_norm, w, trace, true));
        }
        step = (step * 2.0).min(config.initial_step.max(1.0));
        if value == 0.0 {
            return Ok(done(it + 1, 0.0, w, trace, false));
        }
    }
    Ok(done(config.max_iterations, gradient_norm, w, trace, false))
}

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{soft_threshold_in_place, BallProjector, SvdCache};
use crate::error::{Error, Result};

/// Douglas–Rachford parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DrConfig {
    pub gamma: f64,
    pub lambda: f64,
    pub max_iterations: usize,
    /// Stop when `‖z_{k+1} − z_k‖ ≤ stop_tolerance · ‖z_{k+1}‖`.
    pub stop_tolerance: f64,
}

impl Default for DrConfig {
    fn default() -> Self {
        DrConfig {
            gamma: 1.0,
            lambda: 1.0,
            max_iterations: 5000,
            stop_tolerance: 1e-9,
        }
    }
}

impl DrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::Config(format!("dr.gamma must be positive, got {}", self.gamma)));
        }
        if !(self.lambda > 0.0 && self.lambda <= 2.0) {
            return Err(Error::Config(format!("dr.lambda must lie in (0, 2], got {}", self.lambda)));
        }
        if !(self.stop_tolerance > 0.0) {
            return Err(Error::Config("dr.stop_tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// `min ‖c‖₁ subject to ‖u − Ψc‖₂ ≤ ε`.
#[derive(Debug, Clone)]
pub struct BpdnProblem {
    pub matrix: DMatrix<f64>,
    pub observations: DVector<f64>,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct BpdnSolution {
    pub coefficients: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖z_{k+1} − z_k‖` for every iteration.
    pub fixed_point_residuals: Vec<f64>,
}

/// Measurement matrix with its SVD, reusable across several `ε`.
#[derive(Debug, Clone)]
pub struct BpdnSolver {
    matrix: DMatrix<f64>,
    observations: DVector<f64>,
    svd: SvdCache,
}

impl BpdnSolver {
    pub fn new(matrix: DMatrix<f64>, observations: DVector<f64>) -> Result<Self> {
        if matrix.nrows() != observations.len() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: observations.len(),
                context: "measurement rows vs observations",
            });
        }
        let svd = SvdCache::new(&matrix)?;
        Ok(BpdnSolver {
            matrix,
            observations,
            svd,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn observations(&self) -> &DVector<f64> {
        &self.observations
    }

    pub fn svd(&self) -> &SvdCache {
        &self.svd
    }

    /// Smallest residual `min_c ‖u − Ψc‖`.
    pub fn residual_floor(&self) -> f64 {
        self.svd.residual_floor(&self.observations)
    }

    pub fn is_feasible(&self, epsilon: f64) -> bool {
        epsilon >= self.residual_floor() * (1.0 - 1e-9)
    }

    pub fn ols(&self) -> DVector<f64> {
        self.svd.pseudo_solve(&self.observations)
    }

    /// Douglas–Rachford with `f = ‖·‖₁` (soft thresholding) and `g` the
    /// indicator of the residual ball (exact projection):
    /// `x = P(z)`, `y = prox_{γf}(2x − z)`, `z ← z + λ(y − x)`. Returns `P(z)`,
    /// which is always feasible.
    pub fn solve(&self, epsilon: f64, config: &DrConfig, start: Option<&DVector<f64>>) -> Result<BpdnSolution> {
        config.validate()?;
        let floor = self.residual_floor();
        if !self.is_feasible(epsilon) {
            return Err(Error::InfeasibleEpsilon {
                epsilon,
                min_residual: floor,
            });
        }
        let projector = BallProjector::new(&self.svd, &self.observations, epsilon)?;
        let p = self.matrix.ncols();
        let mut z = match start {
            Some(c0) if c0.len() == p => c0.clone(),
            Some(c0) => {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    actual: c0.len(),
                    context: "initial coefficients",
                })
            }
            None => DVector::zeros(p),
        };
        let mut history = Vec::new();
        let mut best: Option<(f64, DVector<f64>)> = None;
        let mut reflected = DVector::zeros(p);
        for it in 0..config.max_iterations {
            let x = projector.project(&z)?;
            let l1 = x.lp_norm(1);
            if best.as_ref().map_or(true, |(b, _)| l1 < *b) {
                best = Some((l1, x.clone()));
            }
            reflected.copy_from(&x);
            reflected *= 2.0;
            reflected -= &z;
            soft_threshold_in_place(&mut reflected, config.gamma);
            let step = (&reflected - &x) * config.lambda;
            let change = step.norm();
            z += step;
            history.push(change);
            if change <= config.stop_tolerance * z.norm() || change == 0.0 {
                return Ok(BpdnSolution {
                    coefficients: projector.project(&z)?,
                    iterations: it + 1,
                    converged: true,
                    fixed_point_residuals: history,
                });
            }
        }
        let last = projector.project(&z)?;
        let coefficients = match best {
            Some((b, x)) if b < last.lp_norm(1) => x,
            _ => last,
        };
        Ok(BpdnSolution {
            coefficients,
            iterations: config.max_iterations,
            converged: false,
            fixed_point_residuals: history,
        })
    }
}

pub fn solve_bpdn(problem: &BpdnProblem, config: &DrConfig, start: Option<&DVector<f64>>) -> Result<BpdnSolution> {
    BpdnSolver::new(problem.matrix.clone(), problem.observations.clone())?.solve(problem.epsilon, config, start)
}

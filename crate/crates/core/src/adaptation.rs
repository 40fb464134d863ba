//! Alternating ℓ1 / rotation fits (fixed reduced dimension) and the
//! row-by-row ladder that grows the reduced dimension.

use log::{debug, warn};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{
    enumerate_multiindices, project_points, rotated_measurement_matrix, ChaosExpansion, MultiIndex,
    MultiIndexSet,
};
use crate::crossval::{select_epsilon, CrossValReport, EpsilonGrid, DEFAULT_TRAIN_FRACTION};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sparse::{BpdnSolver, DrConfig};
use crate::stiefel::{
    canonicalize_signs, l2_objective, optimize_rotation, random_stiefel, ProjectionMatrix, RotationOptConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonChoice {
    /// Re-estimated by cross-validation for every reduced dimension.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptConfig {
    pub epsilon: EpsilonChoice,
    pub max_outer_iterations: usize,
    /// Relative change of `‖c‖₁` between outer iterations.
    pub tolerance_l1: f64,
    /// Change of `J(W)` between outer iterations, relative to `‖u‖²`.
    pub tolerance_l2: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Least squares replaces the ℓ1 step when `N ≥ ols_factor · |𝒥_Q^{d'}|`.
    pub ols_factor: f64,
    /// Disable to keep `W` at its initial value (plain compressive sensing).
    pub rotate: bool,
    pub crossval_grid: EpsilonGrid,
    pub crossval_train_fraction: f64,
    pub dr: DrConfig,
    pub rotation: RotationOptConfig,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            epsilon: EpsilonChoice::Auto,
            max_outer_iterations: 30,
            tolerance_l1: 1e-4,
            tolerance_l2: 1e-6,
            restarts: 10,
            seed: 0,
            ols_factor: 2.0,
            rotate: true,
            crossval_grid: EpsilonGrid::default(),
            crossval_train_fraction: DEFAULT_TRAIN_FRACTION,
            dr: DrConfig::default(),
            rotation: RotationOptConfig::default(),
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        self.dr.validate()?;
        if self.max_outer_iterations == 0 {
            return Err(Error::Config("max_outer_iterations must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if let EpsilonChoice::Fixed(e) = self.epsilon {
            if !(e >= 0.0) || !e.is_finite() {
                return Err(Error::Config(format!("epsilon must be finite and ≥ 0, got {e}")));
            }
        }
        if !(self.crossval_train_fraction > 0.0 && self.crossval_train_fraction < 1.0) {
            return Err(Error::Config("crossval train fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn uses_ols(&self, samples: usize, basis: usize) -> bool {
        samples as f64 >= self.ols_factor * basis as f64
    }
}

/// Surrogate `u(ξ) ≈ Σ_γ c̃_γ ψ_γ(Wξ)`.
#[derive(Debug, Clone)]
pub struct AdaptedExpansion {
    pub projection: ProjectionMatrix,
    pub expansion: ChaosExpansion,
    /// Tolerance of the ℓ1 fit; `None` when least squares was used.
    pub fit_epsilon: Option<f64>,
    /// `‖u − Ψ_W c‖₂` on the data the expansion was fit to.
    pub l2_residual: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    /// `J(W)` after each outer iteration.
    pub objective_trace: Vec<f64>,
    pub crossval: Option<CrossValReport>,
    /// Index of the winning restart.
    pub restart: usize,
}

impl AdaptedExpansion {
    pub fn order(&self) -> usize {
        self.expansion.order()
    }

    pub fn reduced_dim(&self) -> usize {
        self.projection.reduced_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.projection.input_dim()
    }

    pub fn evaluate(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: xi.len(),
                context: "input point vs projection",
            });
        }
        let eta: Vec<f64> = (0..self.reduced_dim())
            .map(|r| self.projection.matrix().row(r).iter().zip(xi).map(|(w, x)| w * x).sum())
            .collect();
        self.expansion.evaluate(&eta)
    }

    pub fn evaluate_many(&self, inputs: &nalgebra::DMatrix<f64>) -> Result<Vec<f64>> {
        self.expansion.evaluate_many(&project_points(&self.projection, inputs)?)
    }

    /// Recomputes `‖u − Ψ_W c‖₂` on `data`.
    pub fn residual_on(&self, data: &Dataset) -> Result<f64> {
        Ok(l2_objective(&self.projection, self.expansion.coefficients(), data, self.expansion.index_set())?.sqrt())
    }
}

/// `(1/2σ²)‖u − Ψ_W c‖² + τ‖c‖₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapDiagnostic {
    pub tau: f64,
    pub sigma: f64,
    pub value: f64,
}

pub fn map_objective(
    coefficients: &[f64],
    w: &ProjectionMatrix,
    data: &Dataset,
    set: &MultiIndexSet,
    tau: f64,
    sigma: f64,
) -> Result<MapDiagnostic> {
    if !(tau > 0.0) || !(sigma > 0.0) {
        return Err(Error::InvalidArgument("tau and sigma must be positive".into()));
    }
    let misfit = l2_objective(w, coefficients, data, set)?;
    let l1: f64 = coefficients.iter().map(|c| c.abs()).sum();
    Ok(MapDiagnostic {
        tau,
        sigma,
        value: misfit / (2.0 * sigma * sigma) + tau * l1,
    })
}

struct Candidate {
    w: ProjectionMatrix,
    c: DVector<f64>,
    objective: f64,
}

fn keep_best(best: &mut Option<Candidate>, w: &ProjectionMatrix, c: &DVector<f64>, objective: f64) {
    if best.as_ref().map_or(true, |b| objective < b.objective) {
        *best = Some(Candidate {
            w: w.clone(),
            c: c.clone(),
            objective,
        });
    }
}

/// Negates coefficients of basis terms with an odd power in any flipped row.
fn flip_coefficients(set: &MultiIndexSet, c: &mut [f64], flipped: &[bool]) {
    for (alpha, coef) in set.iter().zip(c.iter_mut()) {
        let odd = alpha
            .entries()
            .iter()
            .zip(flipped)
            .filter(|(&a, &f)| f && a % 2 == 1)
            .count();
        if odd % 2 == 1 {
            *coef = -*coef;
        }
    }
}

/// Alternates a coefficient solve at fixed `W` with a rotation solve at fixed
/// `c` until both `‖c‖₁` and `J(W)` settle or the iteration cap is hit.
/// Returns the visited pair with the smallest misfit.
///
/// `c0` seeds the best-iterate tracker (it must be a coefficient vector for
/// `w0`'s reduced dimension); the first coefficient solve does not depend on it
/// beyond warm starting.
pub fn adapt_fixed_dim(
    data: &Dataset,
    order: usize,
    w0: &ProjectionMatrix,
    c0: Option<&[f64]>,
    config: &AdaptConfig,
) -> Result<AdaptedExpansion> {
    config.validate()?;
    let set = enumerate_multiindices(w0.reduced_dim(), order)?;
    if w0.input_dim() != data.dimension() {
        return Err(Error::DimensionMismatch {
            expected: data.dimension(),
            actual: w0.input_dim(),
            context: "projection columns vs data",
        });
    }
    let use_ols = config.uses_ols(data.len(), set.len());
    let (epsilon, report) = if use_ols {
        (None, None)
    } else {
        match config.epsilon {
            EpsilonChoice::Fixed(e) => (Some(e), None),
            EpsilonChoice::Auto => {
                let rep = select_epsilon(
                    data,
                    Some(w0),
                    &set,
                    &config.crossval_grid,
                    config.crossval_train_fraction,
                    derive_seed(config.seed, 0xC5),
                    &config.dr,
                )?;
                (Some(rep.selected_epsilon), Some(rep))
            }
        }
    };

    let u = data.outputs();
    let scale = u.norm_squared().max(f64::MIN_POSITIVE);
    let mut w = w0.clone();
    let mut c = match c0 {
        Some(c0) if c0.len() == set.len() => DVector::from_column_slice(c0),
        Some(c0) => {
            return Err(Error::DimensionMismatch {
                expected: set.len(),
                actual: c0.len(),
                context: "initial coefficients",
            })
        }
        None => DVector::zeros(set.len()),
    };
    let mut best: Option<Candidate> = None;
    if let Some(c0) = c0 {
        let j0 = l2_objective(&w, c0, data, &set)?;
        keep_best(&mut best, &w, &c, j0);
    }

    let mut trace = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..config.max_outer_iterations {
        iterations = it + 1;
        let psi = rotated_measurement_matrix(&w, data.inputs(), &set)?;
        let solver = BpdnSolver::new(psi, u.clone())?;
        c = match epsilon {
            None => solver.ols(),
            Some(eps) => {
                let eps = if solver.is_feasible(eps) {
                    eps
                } else if it == 0 {
                    return Err(Error::InfeasibleEpsilon {
                        epsilon: eps,
                        min_residual: solver.residual_floor(),
                    });
                } else {
                    warn!("epsilon {eps:e} infeasible after rotation; fitting at the residual floor");
                    solver.residual_floor()
                };
                let sol = solver.solve(eps, &config.dr, Some(&c))?;
                if !sol.converged {
                    debug!("Douglas–Rachford hit its iteration cap at outer iteration {iterations}");
                }
                sol.coefficients
            }
        };
        let fitted = (u - solver.matrix() * &c).norm_squared();
        keep_best(&mut best, &w, &c, fitted);

        let objective = if config.rotate {
            let out = optimize_rotation(&w, c.as_slice(), data, &set, &config.rotation)?;
            w = out.projection;
            let j = *out.objective_trace.last().unwrap_or(&fitted);
            keep_best(&mut best, &w, &c, j);
            j
        } else {
            fitted
        };
        trace.push(objective);

        let l1 = c.lp_norm(1);
        if let Some((prev_l1, prev_j)) = prev {
            let l1_change = (l1 - prev_l1).abs() / prev_l1.max(f64::MIN_POSITIVE);
            let j_change = (objective - prev_j).abs() / scale;
            if l1_change < config.tolerance_l1 && j_change < config.tolerance_l2 {
                converged = true;
                break;
            }
        }
        prev = Some((l1, objective));
    }

    let best = best.expect("at least one outer iteration ran");
    let (projection, flipped) = canonicalize_signs(&best.w);
    let mut coefficients: Vec<f64> = best.c.iter().copied().collect();
    flip_coefficients(&set, &mut coefficients, &flipped);
    let expansion = ChaosExpansion::new(set, coefficients)?;
    let l2_residual = l2_objective(&projection, expansion.coefficients(), data, expansion.index_set())?.sqrt();
    Ok(AdaptedExpansion {
        projection,
        expansion,
        fit_epsilon: epsilon,
        l2_residual,
        outer_iterations: iterations,
        converged,
        objective_trace: trace,
        crossval: report,
        restart: 0,
    })
}

/// Seeds of the random starts used when fitting reduced dimension `stage`.
pub fn restart_seeds(config: &AdaptConfig, stage: usize) -> Vec<u64> {
    let base = derive_seed(config.seed, stage as u64);
    (0..config.restarts).map(|r| derive_seed(base, r as u64)).collect()
}

/// Runs `adapt_fixed_dim` from `config.restarts` random starts that share
/// the frozen block `frozen` (if any) and keeps the lowest residual.
fn adapt_with_restarts(
    data: &Dataset,
    order: usize,
    frozen: Option<&AdaptedExpansion>,
    stage: usize,
    config: &AdaptConfig,
) -> Result<AdaptedExpansion> {
    let d = data.dimension();
    let reduced = frozen.map_or(1, |f| f.reduced_dim() + 1);
    let set = enumerate_multiindices(reduced, order)?;
    let carried = frozen.map(|f| pad_coefficients(&f.expansion, &set)).transpose()?;
    let seeds = restart_seeds(config, stage);
    let runs: Vec<Result<AdaptedExpansion>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = seeds[r];
            let w0 = random_stiefel(d, 1, frozen.map(|f| &f.projection), seed)?;
            let stage_config = AdaptConfig {
                seed,
                ..config.clone()
            };
            let run = match &carried {
                Some(c) => adapt_fixed_dim(data, order, &w0, Some(c), &stage_config),
                None => {
                    // least-squares start at the random direction
                    let psi = rotated_measurement_matrix(&w0, data.inputs(), &set)?;
                    let c0 = BpdnSolver::new(psi, data.outputs().clone())?.ols();
                    adapt_fixed_dim(data, order, &w0, Some(c0.as_slice()), &stage_config)
                }
            };
            run.map(|mut a| {
                a.restart = r;
                a
            })
        })
        .collect();
    let mut best: Option<AdaptedExpansion> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(a) => {
                if best.as_ref().map_or(true, |b| a.l2_residual < b.l2_residual) {
                    best = Some(a);
                }
            }
            Err(e) => {
                warn!("restart failed: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("restarts ≥ 1"))
}

/// Coefficients of `e` re-indexed into the larger `set` (new variables get zero).
pub fn pad_coefficients(e: &ChaosExpansion, set: &MultiIndexSet) -> Result<Vec<f64>> {
    if e.order() != set.order() || e.dimension() > set.dimension() {
        return Err(Error::InvalidArgument(format!(
            "cannot embed order {} dimension {} into order {} dimension {}",
            e.order(),
            e.dimension(),
            set.order(),
            set.dimension()
        )));
    }
    let mut out = vec![0.0; set.len()];
    for (alpha, c) in e.index_set().iter().zip(e.coefficients()) {
        let pos = set
            .position(&alpha.padded(set.dimension()))
            .expect("total-degree sets are nested");
        out[pos] = *c;
    }
    Ok(out)
}

/// Grows the reduced dimension from 1 to `max_reduced`, freezing the rows
/// found so far and fitting one new row (plus all coefficients) per stage.
pub fn adapt_successive(
    data: &Dataset,
    max_reduced: usize,
    order: usize,
    config: &AdaptConfig,
) -> Result<Vec<AdaptedExpansion>> {
    config.validate()?;
    if max_reduced == 0 || max_reduced > data.dimension() {
        return Err(Error::InvalidArgument(format!(
            "reduced dimension must lie in [1, {}], got {max_reduced}",
            data.dimension()
        )));
    }
    let mut results: Vec<AdaptedExpansion> = Vec::with_capacity(max_reduced);
    for stage in 1..=max_reduced {
        let next = adapt_with_restarts(data, order, results.last(), stage, config)?;
        if let (Some(prev), Some(e_prev), Some(e_next)) = (
            results.last(),
            results.last().and_then(|r| r.fit_epsilon),
            next.fit_epsilon,
        ) {
            if e_next > e_prev {
                warn!(
                    "fit tolerance grew from {e_prev:e} (d'={}) to {e_next:e} (d'={stage})",
                    prev.reduced_dim()
                );
            }
        }
        results.push(next);
    }
    Ok(results)
}

/// One aligned coefficient of consecutive results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarryoverEntry {
    pub index: MultiIndex,
    pub previous: Option<f64>,
    pub current: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarryoverComparison {
    pub from_dim: usize,
    pub to_dim: usize,
    pub entries: Vec<CarryoverEntry>,
    /// `‖c_{d'} − pad(c_{d'−1})‖₂`.
    pub difference_norm: f64,
    pub current_norm: f64,
}

/// Aligns the coefficients of each `(d'−1, d')` pair by zero-padding the
/// smaller index set.
pub fn coefficient_carryover_report(results: &[AdaptedExpansion]) -> Result<Vec<CarryoverComparison>> {
    results
        .windows(2)
        .map(|pair| {
            let (a, b) = (&pair[0], &pair[1]);
            if a.order() != b.order() {
                return Err(Error::InvalidArgument(format!(
                    "expansion orders differ ({} vs {})",
                    a.order(),
                    b.order()
                )));
            }
            let padded = pad_coefficients(&a.expansion, b.expansion.index_set())?;
            let mut entries = Vec::with_capacity(padded.len());
            let mut diff2 = 0.0;
            for (alpha, (&prev, &cur)) in b.expansion.index_set().iter().zip(padded.iter().zip(b.expansion.coefficients())) {
                let in_previous = alpha.entries().last() == Some(&0) || b.reduced_dim() == a.reduced_dim();
                let difference = cur - prev;
                diff2 += difference * difference;
                entries.push(CarryoverEntry {
                    index: alpha.clone(),
                    previous: in_previous.then_some(prev),
                    current: cur,
                    difference,
                });
            }
            Ok(CarryoverComparison {
                from_dim: a.reduced_dim(),
                to_dim: b.reduced_dim(),
                entries,
                difference_norm: diff2.sqrt(),
                current_norm: b.expansion.coefficients().iter().map(|c| c * c).sum::<f64>().sqrt(),
            })
        })
        .collect()
}

/// Fraction of the expansion variance carried by terms that involve reduced
/// coordinate `dim`.
pub fn variance_share(expansion: &ChaosExpansion, dim: usize) -> f64 {
    let mut total = 0.0;
    let mut part = 0.0;
    for (alpha, c) in expansion.index_set().iter().zip(expansion.coefficients()).skip(1) {
        total += c * c;
        if alpha.entries().get(dim).copied().unwrap_or(0) > 0 {
            part += c * c;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        part / total
    }
}

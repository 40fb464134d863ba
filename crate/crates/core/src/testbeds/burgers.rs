//! Viscous Burgers' equation on `[0, 2π] × [0, 1]` with random forcing
//! `σ Σ_l ξ_l φ_l(x, t)`, solved by backward Euler in time, central
//! differences in space and Newton's method per step.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingCase {
    /// `φ_l = cos(2lx) cos(2lπt) / √l`
    Decaying,
    /// `φ_l = cos(2lx) cos(2lπt) / M`
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BurgersSpec {
    pub modes: usize,
    pub nu: f64,
    pub sigma: f64,
    pub forcing: ForcingCase,
    /// Spatial intervals; the grid has `nx + 1` nodes.
    pub nx: usize,
    /// Time steps.
    pub nt: usize,
    pub newton_tolerance: f64,
    pub newton_max_iter: usize,
}

impl Default for BurgersSpec {
    fn default() -> Self {
        BurgersSpec {
            modes: 20,
            nu: 0.5,
            sigma: 2.0,
            forcing: ForcingCase::Uniform,
            nx: 128,
            nt: 128,
            newton_tolerance: 1e-10,
            newton_max_iter: 25,
        }
    }
}

impl BurgersSpec {
    pub fn with_case(forcing: ForcingCase) -> Self {
        BurgersSpec {
            forcing,
            ..Default::default()
        }
    }

    /// 500 × 500 grid.
    pub fn full_fidelity(forcing: ForcingCase) -> Self {
        BurgersSpec {
            forcing,
            nx: 500,
            nt: 500,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {}", self.nu)));
        }
        if self.nx < 16 || self.nt < 16 {
            return Err(Error::InvalidArgument(format!(
                "grid must have at least 16 cells per axis, got {}×{}",
                self.nx, self.nt
            )));
        }
        if self.modes == 0 {
            return Err(Error::InvalidArgument("forcing needs at least one mode".into()));
        }
        Ok(())
    }
}

/// Initial/boundary data and source for a Burgers IBVP on `[0, 2π] × [0, 1]`.
pub trait BurgersProblem {
    fn initial(&self, x: f64) -> f64;
    /// Dirichlet values `(v(0, t), v(2π, t))`.
    fn boundary(&self, t: f64) -> (f64, f64);
    fn source(&self, x: f64, t: f64) -> f64;
}

/// The forced problem with `v(x, 0) = 1 + sin 2x` and `v(0, t) = v(2π, t) = 1 + sin πt`.
pub struct ForcedBurgers<'a> {
    spec: &'a BurgersSpec,
    xi: &'a [f64],
}

impl<'a> ForcedBurgers<'a> {
    pub fn new(spec: &'a BurgersSpec, xi: &'a [f64]) -> Result<Self> {
        if xi.len() != spec.modes {
            return Err(Error::DimensionMismatch {
                expected: spec.modes,
                actual: xi.len(),
                context: "forcing coefficients",
            });
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("forcing coefficients must be finite".into()));
        }
        Ok(ForcedBurgers { spec, xi })
    }
}

impl BurgersProblem for ForcedBurgers<'_> {
    fn initial(&self, x: f64) -> f64 {
        1.0 + (2.0 * x).sin()
    }

    fn boundary(&self, t: f64) -> (f64, f64) {
        let v = 1.0 + (PI * t).sin();
        (v, v)
    }

    fn source(&self, x: f64, t: f64) -> f64 {
        if self.spec.sigma == 0.0 {
            return 0.0;
        }
        let m = self.spec.modes as f64;
        let total: f64 = self
            .xi
            .iter()
            .enumerate()
            .map(|(k, xi)| {
                let l = (k + 1) as f64;
                let scale = match self.spec.forcing {
                    ForcingCase::Decaying => 1.0 / l.sqrt(),
                    ForcingCase::Uniform => 1.0 / m,
                };
                xi * (2.0 * l * x).cos() * (2.0 * l * PI * t).cos() * scale
            })
            .sum();
        self.spec.sigma * total
    }
}

/// Solution on the space-time grid; `values[(n, i)] = v(x_i, t_n)`.
#[derive(Debug, Clone)]
pub struct BurgersField {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub values: DMatrix<f64>,
}

impl BurgersField {
    pub fn final_slice(&self) -> Vec<f64> {
        let last = self.values.nrows() - 1;
        self.values.row(last).iter().copied().collect()
    }

    /// `(1/2π) ∫ v(x, 1) dx` by the trapezoidal rule over all nodes.
    pub fn spatial_average(&self) -> f64 {
        let v = self.final_slice();
        let h = self.x[1] - self.x[0];
        let n = v.len();
        let interior: f64 = v[1..n - 1].iter().sum();
        h * (0.5 * (v[0] + v[n - 1]) + interior) / (2.0 * PI)
    }
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = diag.len();
    scratch[0] = upper[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

/// Integrates any [`BurgersProblem`] with viscosity `nu` on an `nx × nt` grid.
pub fn solve_problem(
    problem: &dyn BurgersProblem,
    nu: f64,
    nx: usize,
    nt: usize,
    newton_tolerance: f64,
    newton_max_iter: usize,
) -> Result<BurgersField> {
    let h = 2.0 * PI / nx as f64;
    let dt = 1.0 / nt as f64;
    let x: Vec<f64> = (0..=nx).map(|i| i as f64 * h).collect();
    let t: Vec<f64> = (0..=nt).map(|n| n as f64 * dt).collect();
    let mut values = DMatrix::zeros(nt + 1, nx + 1);
    let mut v: Vec<f64> = x.iter().map(|&xi| problem.initial(xi)).collect();
    let (l0, r0) = problem.boundary(0.0);
    v[0] = l0;
    v[nx] = r0;
    values.row_mut(0).copy_from_slice(&v);

    let m = nx - 1;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    let mut forcing = vec![0.0; m];
    let inv_dt = 1.0 / dt;
    let conv = 1.0 / (4.0 * h);
    let diff = nu / (h * h);

    for step in 1..=nt {
        let tn = t[step];
        let old = v.clone();
        let (left, right) = problem.boundary(tn);
        v[0] = left;
        v[nx] = right;
        for i in 1..nx {
            forcing[i - 1] = problem.source(x[i], tn);
        }
        let mut converged = false;
        let mut norm = f64::INFINITY;
        for _ in 0..=newton_max_iter {
            // F_i = (v_i − v_i^old)/dt + (v_{i+1}² − v_{i−1}²)/(4h) − ν(v_{i+1} − 2v_i + v_{i−1})/h² − f_i
            norm = 0.0;
            for i in 1..nx {
                let r = (v[i] - old[i]) * inv_dt + conv * (v[i + 1] * v[i + 1] - v[i - 1] * v[i - 1])
                    - diff * (v[i + 1] - 2.0 * v[i] + v[i - 1])
                    - forcing[i - 1];
                rhs[i - 1] = -r;
                norm = f64::max(norm, r.abs());
                diag[i - 1] = inv_dt + 2.0 * diff;
                lower[i - 1] = -2.0 * conv * v[i - 1] - diff;
                upper[i - 1] = 2.0 * conv * v[i + 1] - diff;
            }
            if !norm.is_finite() {
                break;
            }
            if norm < newton_tolerance {
                converged = true;
                break;
            }
            thomas(&lower, &diag, &upper, &mut rhs, &mut scratch);
            let mut largest_step: f64 = 0.0;
            let mut largest_value: f64 = 0.0;
            for i in 1..nx {
                v[i] += rhs[i - 1];
                largest_step = largest_step.max(rhs[i - 1].abs());
                largest_value = largest_value.max(v[i].abs());
            }
            // update at round-off level: the residual cannot shrink further
            if largest_step <= 4.0 * f64::EPSILON * largest_value.max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NewtonNoConvergence {
                step,
                residual: norm,
            });
        }
        values.row_mut(step).copy_from_slice(&v);
    }
    Ok(BurgersField { x, t, values })
}

pub fn burgers_solve(spec: &BurgersSpec, xi: &[f64]) -> Result<BurgersField> {
    spec.validate()?;
    let problem = ForcedBurgers::new(spec, xi)?;
    solve_problem(
        &problem,
        spec.nu,
        spec.nx,
        spec.nt,
        spec.newton_tolerance,
        spec.newton_max_iter,
    )
}

/// Spatial mean of the solution at `t = 1`.
pub fn burgers_qoi(spec: &BurgersSpec, xi: &[f64]) -> Result<f64> {
    Ok(burgers_solve(spec, xi)?.spatial_average())
}

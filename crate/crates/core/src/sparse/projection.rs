use nalgebra::DVector;

use super::SvdCache;
use crate::error::{Error, Result};

const ROOT_MAX_ITERATIONS: usize = 200;
const ROOT_RELATIVE_TOLERANCE: f64 = 1e-10;

/// Exact Euclidean projection onto `{c : ‖Ψc − u‖ ≤ ε}` using a cached SVD of Ψ.
///
/// With `a = Vᵀc`, `b = Uᵀu` and `r_i = s_i a_i − b_i`, the boundary point
/// for multiplier `μ` moves `a_i` by `−μ s_i r_i / (1 + μ s_i²)` and has residual
/// `Σ r_i² / (1 + μ s_i²)² + ρ²`, where `ρ` is the residual floor. `μ` is found by
/// safeguarded Newton on `1/res(μ) − 1/ε`.
pub struct BallProjector<'a> {
    svd: &'a SvdCache,
    b: DVector<f64>,
    floor: f64,
    epsilon: f64,
}

impl<'a> BallProjector<'a> {
    pub fn new(svd: &'a SvdCache, observations: &DVector<f64>, epsilon: f64) -> Result<Self> {
        if observations.len() != svd.rows() {
            return Err(Error::DimensionMismatch {
                expected: svd.rows(),
                actual: observations.len(),
                context: "observations vs measurement rows",
            });
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("epsilon must be finite and ≥ 0, got {epsilon}")));
        }
        Ok(BallProjector {
            svd,
            b: svd.u().tr_mul(observations),
            floor: svd.residual_floor(observations),
            epsilon,
        })
    }

    pub fn residual_floor(&self) -> f64 {
        self.floor
    }

    pub fn project(&self, c: &DVector<f64>) -> Result<DVector<f64>> {
        if c.len() != self.svd.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.svd.cols(),
                actual: c.len(),
                context: "coefficients vs measurement columns",
            });
        }
        let s = self.svd.singular_values();
        let a = self.svd.v_t() * c;
        let r: DVector<f64> = s.component_mul(&a) - &self.b;
        let floor2 = self.floor * self.floor;
        let eps = self.epsilon;
        let res_at = |mu: f64| -> (f64, f64) {
            // (res², d res²/dμ)
            let mut val = floor2;
            let mut der = 0.0;
            for i in 0..s.len() {
                let t = 1.0 + mu * s[i] * s[i];
                let ri2 = r[i] * r[i];
                val += ri2 / (t * t);
                der -= 2.0 * ri2 * s[i] * s[i] / (t * t * t);
            }
            (val, der)
        };

        let (res0_sq, _) = res_at(0.0);
        if res0_sq.sqrt() <= eps {
            return Ok(c.clone());
        }

        let shift = if eps - self.floor <= ROOT_RELATIVE_TOLERANCE * eps {
            // boundary coincides with the residual floor: land on the affine minimizer set
            DVector::from_iterator(s.len(), (0..s.len()).map(|i| -r[i] / s[i]))
        } else {
            let mu = self.find_multiplier(&res_at)?;
            DVector::from_iterator(
                s.len(),
                (0..s.len()).map(|i| -mu * s[i] * r[i] / (1.0 + mu * s[i] * s[i])),
            )
        };
        Ok(c + self.svd.v_t().tr_mul(&shift))
    }

    fn find_multiplier(&self, res_at: &dyn Fn(f64) -> (f64, f64)) -> Result<f64> {
        let eps = self.epsilon;
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        let mut mu = 0.0f64;
        for _ in 0..ROOT_MAX_ITERATIONS {
            let (val, der) = res_at(mu);
            let res = val.sqrt();
            if (res - eps).abs() <= ROOT_RELATIVE_TOLERANCE * eps {
                return Ok(mu);
            }
            if res > eps {
                lo = mu;
            } else {
                hi = mu;
            }
            // Newton on φ(μ) = 1/res − 1/ε, φ'(μ) = −der / (2 res³)
            let phi = 1.0 / res - 1.0 / eps;
            let dphi = -der / (2.0 * res * res * res);
            let mut next = if dphi > 0.0 { mu - phi / dphi } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = if hi.is_finite() {
                    if lo > 0.0 {
                        (lo * hi).sqrt()
                    } else {
                        0.5 * hi
                    }
                } else {
                    (lo * 10.0).max(1.0 / self.svd.singular_values().iter().fold(f64::INFINITY, |m, &v| m.min(v * v)))
                };
            }
            if next == mu {
                return Ok(mu);
            }
            mu = next;
        }
        Err(Error::ProjectionNoConvergence {
            iterations: ROOT_MAX_ITERATIONS,
        })
    }
}

/// One-shot projection of `c` onto the residual ball of `problem`.
pub fn project_residual_ball(
    c: &DVector<f64>,
    observations: &DVector<f64>,
    epsilon: f64,
    svd: &SvdCache,
) -> Result<DVector<f64>> {
    BallProjector::new(svd, observations, epsilon)?.project(c)
}

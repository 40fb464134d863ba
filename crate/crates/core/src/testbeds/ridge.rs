use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chaos::{enumerate_multiindices, ChaosExpansion};
use crate::error::{Error, Result};
use crate::stiefel::ProjectionMatrix;

/// `u(ξ) = s + 0.25 s² + 0.025 s³` with `s = Σ ξ_i`: an exact one-dimensional
/// ridge along `d^{-1/2}(1, …, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeSpec {
    pub dimension: usize,
}

impl RidgeSpec {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("ridge dimension must be at least 1".into()));
        }
        Ok(RidgeSpec { dimension })
    }
}

pub fn ridge_qoi(spec: &RidgeSpec, point: &[f64]) -> Result<f64> {
    if point.len() != spec.dimension {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension,
            actual: point.len(),
            context: "ridge input",
        });
    }
    let s: f64 = point.iter().sum();
    Ok(s + 0.25 * s * s + 0.025 * s * s * s)
}

/// The known adaptation: `w = d^{-1/2}(1, …, 1)` and the cubic re-expanded in
/// `ψ_0..ψ_3` of `η = w·ξ`, using `η² = √2 ψ_2 + 1` and `η³ = √6 ψ_3 + 3 ψ_1`.
pub fn ridge_exact_adaptation(spec: &RidgeSpec) -> Result<(ProjectionMatrix, ChaosExpansion)> {
    let d = spec.dimension as f64;
    let w = DMatrix::from_element(1, spec.dimension, 1.0 / d.sqrt());
    let a1 = d.sqrt();
    let a2 = 0.25 * d;
    let a3 = 0.025 * d.powf(1.5);
    let coefficients = vec![a2, a1 + 3.0 * a3, a2 * 2f64.sqrt(), a3 * 6f64.sqrt()];
    Ok((
        ProjectionMatrix::new(w, 0)?,
        ChaosExpansion::new(enumerate_multiindices(1, 3)?, coefficients)?,
    ))
}

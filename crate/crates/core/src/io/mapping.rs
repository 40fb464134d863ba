use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};

const QUANTILE_CLIP: f64 = 1e-12;
const GAUSSIAN_GUARD: f64 = 8.5;

/// Physical bounds of one uniformly distributed parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRange {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl ParameterRange {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Result<Self> {
        let name = name.into();
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "range for `{name}` needs finite lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(ParameterRange { name, lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Standard normal CDF through `erfc`, accurate in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    if x > 0.0 {
        1.0 - 0.5 * erfc(x / std::f64::consts::SQRT_2)
    } else {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }
}

/// Inverse standard normal CDF: rational approximation refined by one Halley step.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    if p.is_nan() {
        return f64::NAN;
    }
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let p_low = 0.02425;
    let x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

fn check_len(values: &[f64], ranges: &[ParameterRange]) -> Result<()> {
    if values.len() != ranges.len() {
        return Err(Error::DimensionMismatch {
            expected: ranges.len(),
            actual: values.len(),
            context: "values vs parameter ranges",
        });
    }
    Ok(())
}

/// Physical parameter values to standard Gaussian coordinates.
/// Values on a range boundary are pulled in to the `1e-12` quantile.
pub fn uniform_to_gaussian(theta: &[f64], ranges: &[ParameterRange]) -> Result<Vec<f64>> {
    check_len(theta, ranges)?;
    theta
        .iter()
        .zip(ranges)
        .map(|(&v, r)| {
            if !(v >= r.lower && v <= r.upper) {
                return Err(Error::OutOfRange {
                    name: r.name.clone(),
                    value: v,
                    lower: r.lower,
                    upper: r.upper,
                });
            }
            let mut p = (v - r.lower) / r.width();
            if p < QUANTILE_CLIP || p > 1.0 - QUANTILE_CLIP {
                warn!("parameter `{}` value {v} at its range boundary; clipping", r.name);
                p = p.clamp(QUANTILE_CLIP, 1.0 - QUANTILE_CLIP);
            }
            Ok(inverse_normal_cdf(p))
        })
        .collect()
}

/// Standard Gaussian coordinates to physical parameter values.
pub fn gaussian_to_uniform(xi: &[f64], ranges: &[ParameterRange]) -> Result<Vec<f64>> {
    check_len(xi, ranges)?;
    Ok(xi
        .iter()
        .zip(ranges)
        .map(|(&x, r)| {
            let mut p = normal_cdf(x);
            if !(x.abs() <= GAUSSIAN_GUARD) {
                warn!("coordinate {x} for `{}` beyond ±{GAUSSIAN_GUARD}; clipping", r.name);
                p = if x.is_nan() { 0.5 } else { p.clamp(QUANTILE_CLIP, 1.0 - QUANTILE_CLIP) };
            }
            r.lower + p * r.width()
        })
        .collect())
}

/// Reads a `name,lower,upper` table.
pub fn read_ranges(path: &Path) -> Result<Vec<ParameterRange>> {
    let mut reader = csv::Reader::from_reader(crate::error::open_file(path)?);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<ParameterRange>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 2,
            column: 0,
            message: e.to_string(),
        })?;
        out.push(ParameterRange::new(row.name, row.lower, row.upper)?);
    }
    if out.is_empty() {
        return Err(Error::Format(format!("{}: no parameter ranges", path.display())));
    }
    Ok(out)
}

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_DENSITY_SAMPLES: usize = 10;
pub const MIN_GRID_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// Silverman's rule `1.06 σ̂ n^{-1/5}`.
    Auto,
    Fixed(f64),
}

/// Kernel density estimate sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub abscissae: Vec<f64>,
    pub pdf_values: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityCurve {
    /// Trapezoidal integral of the curve.
    pub fn integral(&self) -> f64 {
        self.abscissae
            .windows(2)
            .zip(self.pdf_values.windows(2))
            .map(|(x, p)| 0.5 * (x[1] - x[0]) * (p[0] + p[1]))
            .sum()
    }
}

fn mean_and_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let (_, sd) = mean_and_std(samples);
    1.06 * sd * (samples.len() as f64).powf(-0.2)
}

/// Gaussian-kernel density on `grid_size` points over `[min − 3h, max + 3h]`.
/// Constant samples give a narrow spike around the common value.
pub fn kde_density(samples: &[f64], grid_size: usize, bandwidth: Bandwidth) -> Result<DensityCurve> {
    if samples.len() < MIN_DENSITY_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "density estimation needs at least {MIN_DENSITY_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::InvalidArgument(format!(
            "density grid needs at least {MIN_GRID_SIZE} points, got {grid_size}"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("density samples contain non-finite values".into()));
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut h = match bandwidth {
        Bandwidth::Auto => silverman_bandwidth(samples),
        Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        Bandwidth::Fixed(h) => return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {h}"))),
    };
    if !(h > 0.0) || hi == lo {
        warn!("samples are (nearly) constant; density is a narrow spike");
        h = if h > 0.0 { h } else { 1e-6 * lo.abs().max(1.0) };
    }
    let a = lo - 3.0 * h;
    let b = hi + 3.0 * h;
    let step = (b - a) / (grid_size - 1) as f64;
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let abscissae: Vec<f64> = (0..grid_size).map(|i| a + step * i as f64).collect();
    let pdf_values = abscissae
        .par_iter()
        .map(|&x| {
            samples
                .iter()
                .map(|&s| {
                    let z = (x - s) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    Ok(DensityCurve {
        abscissae,
        pdf_values,
        bandwidth: h,
    })
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("KS distance needs non-empty samples".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

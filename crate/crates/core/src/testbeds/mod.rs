//! Synthetic quantities of interest with known structure.

mod burgers;
mod ridge;

pub use burgers::{
    burgers_qoi, burgers_solve, solve_problem, BurgersField, BurgersProblem, BurgersSpec, ForcedBurgers,
    ForcingCase,
};
pub use ridge::{ridge_exact_adaptation, ridge_qoi, RidgeSpec};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{gaussian_matrix, seeded_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Testbed {
    Ridge(RidgeSpec),
    Burgers(BurgersSpec),
}

impl Testbed {
    pub fn input_dim(&self) -> usize {
        match self {
            Testbed::Ridge(r) => r.dimension,
            Testbed::Burgers(b) => b.modes,
        }
    }

    pub fn qoi(&self, point: &[f64]) -> Result<f64> {
        match self {
            Testbed::Ridge(r) => ridge_qoi(r, point),
            Testbed::Burgers(b) => burgers_qoi(b, point),
        }
    }
}

/// `n` i.i.d. standard Gaussian inputs and their QoI values.
pub fn generate_dataset(testbed: &Testbed, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    if let Testbed::Burgers(spec) = testbed {
        spec.validate()?;
    }
    let inputs = gaussian_matrix(&mut seeded_rng(seed), n, testbed.input_dim());
    let outputs: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let point: Vec<f64> = inputs.row(i).iter().copied().collect();
            testbed.qoi(&point)
        })
        .collect::<Result<_>>()?;
    Dataset::new(inputs, DVector::from_vec(outputs))
}

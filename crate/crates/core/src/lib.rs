//! Basis adaptation for Hermite polynomial chaos surrogates.
//!
//! Jointly learns a sparse coefficient vector and a row-orthonormal input
//! projection `W` from scattered samples, so a quantity of interest over many
//! Gaussian inputs `ξ` is approximated by a low-order expansion in `η = Wξ`.

pub mod adaptation;
pub mod chaos;
pub mod cli;
pub mod crossval;
pub mod dataset;
pub mod error;
pub mod io;
pub mod rng;
pub mod sparse;
pub mod stiefel;
pub mod testbeds;

pub use dataset::Dataset;
pub use nalgebra;
pub use error::{Error, Result};

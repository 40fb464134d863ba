use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::adaptation::{AdaptConfig, AdaptedExpansion};
use crate::chaos::{enumerate_multiindices, ChaosExpansion};
use crate::error::{Error, Result};
use crate::stiefel::ProjectionMatrix;

pub const EXPANSION_FORMAT: &str = "chaosadapt-expansion/1";
pub const MANIFEST_FORMAT: &str = "chaosadapt-manifest/1";

/// Self-describing JSON form of an adapted expansion.
///
/// `multi_indices[k]` pairs with `coefficients[k]`; `projection` holds the
/// rows of `W`, so the surrogate is `Σ_k c_k ψ_{α_k}(Wξ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionDocument {
    pub format: String,
    pub input_dim: usize,
    pub reduced_dim: usize,
    pub order: usize,
    pub multi_indices: Vec<Vec<u32>>,
    pub coefficients: Vec<f64>,
    pub projection: Vec<Vec<f64>>,
    pub fixed_rows: usize,
    pub fit_epsilon: Option<f64>,
    pub l2_residual: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    pub restart: usize,
    #[serde(default)]
    pub objective_trace: Vec<f64>,
}

impl ExpansionDocument {
    pub fn from_adapted(a: &AdaptedExpansion) -> Self {
        ExpansionDocument {
            format: EXPANSION_FORMAT.into(),
            input_dim: a.input_dim(),
            reduced_dim: a.reduced_dim(),
            order: a.order(),
            multi_indices: a.expansion.index_set().iter().map(|m| m.entries().to_vec()).collect(),
            coefficients: a.expansion.coefficients().to_vec(),
            projection: a.projection.rows(),
            fixed_rows: a.projection.fixed_rows(),
            fit_epsilon: a.fit_epsilon,
            l2_residual: a.l2_residual,
            outer_iterations: a.outer_iterations,
            converged: a.converged,
            restart: a.restart,
            objective_trace: a.objective_trace.clone(),
        }
    }

    /// Validates the document and rebuilds the expansion.
    pub fn into_adapted(self) -> Result<AdaptedExpansion> {
        if self.format != EXPANSION_FORMAT {
            return Err(Error::Format(format!(
                "expected format `{EXPANSION_FORMAT}`, found `{}`",
                self.format
            )));
        }
        let set = enumerate_multiindices(self.reduced_dim, self.order)?;
        let listed_ok = self.multi_indices.len() == set.len()
            && set.iter().zip(&self.multi_indices).all(|(a, b)| a.entries() == b.as_slice());
        if !listed_ok {
            return Err(Error::Format(
                "multi-index list is not the graded total-degree set for the stated dimension and order".into(),
            ));
        }
        if self.projection.len() != self.reduced_dim || self.projection.iter().any(|r| r.len() != self.input_dim) {
            return Err(Error::Format(format!(
                "projection must have {} rows of length {}",
                self.reduced_dim, self.input_dim
            )));
        }
        let flat: Vec<f64> = self.projection.concat();
        let w = DMatrix::from_row_slice(self.reduced_dim, self.input_dim, &flat);
        let projection = ProjectionMatrix::new(w, self.fixed_rows)?;
        let expansion = ChaosExpansion::new(set, self.coefficients)?;
        Ok(AdaptedExpansion {
            projection,
            expansion,
            fit_epsilon: self.fit_epsilon,
            l2_residual: self.l2_residual,
            outer_iterations: self.outer_iterations,
            converged: self.converged,
            objective_trace: self.objective_trace,
            crossval: None,
            restart: self.restart,
        })
    }
}

pub fn write_expansion(a: &AdaptedExpansion, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&ExpansionDocument::from_adapted(a))?;
    write_atomic(path, text.as_bytes())
}

pub fn read_expansion(path: &Path) -> Result<AdaptedExpansion> {
    let doc: ExpansionDocument = serde_json::from_str(&crate::error::read_text(path)?)?;
    doc.into_adapted()
}

/// Result of one reduced dimension in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub reduced_dim: usize,
    pub projection: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub fit_epsilon: Option<f64>,
    pub l2_residual: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    pub restart: usize,
}

impl StageRecord {
    pub fn from_adapted(a: &AdaptedExpansion) -> Self {
        StageRecord {
            reduced_dim: a.reduced_dim(),
            projection: a.projection.rows(),
            coefficients: a.expansion.coefficients().to_vec(),
            fit_epsilon: a.fit_epsilon,
            l2_residual: a.l2_residual,
            outer_iterations: a.outer_iterations,
            converged: a.converged,
            restart: a.restart,
        }
    }
}

/// Everything needed to re-run an adaptation and check the outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub tool_version: String,
    pub config: AdaptConfig,
    pub order: usize,
    pub max_reduced: usize,
    /// Seeds of every restart, per stage (derived from `config.seed`).
    pub restart_seeds: Vec<Vec<u64>>,
    pub dataset_path: Option<String>,
    pub dataset_digest: String,
    pub dataset_rows: usize,
    pub dataset_dim: usize,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn new(
        config: &AdaptConfig,
        order: usize,
        data: &crate::Dataset,
        dataset_path: Option<String>,
        results: &[AdaptedExpansion],
    ) -> Self {
        RunManifest {
            format: MANIFEST_FORMAT.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            order,
            max_reduced: results.len(),
            restart_seeds: (1..=results.len())
                .map(|s| crate::adaptation::restart_seeds(config, s))
                .collect(),
            dataset_path,
            dataset_digest: data.digest(),
            dataset_rows: data.len(),
            dataset_dim: data.dimension(),
            stages: results.iter().map(StageRecord::from_adapted).collect(),
        }
    }

    /// Checks that `results` agree bit for bit with the recorded stages.
    pub fn matches(&self, results: &[AdaptedExpansion]) -> bool {
        self.stages.len() == results.len()
            && self
                .stages
                .iter()
                .zip(results)
                .all(|(s, r)| *s == StageRecord::from_adapted(r))
    }
}

pub fn write_manifest(m: &RunManifest, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(m)?;
    write_atomic(path, text.as_bytes())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let m: RunManifest = serde_json::from_str(&crate::error::read_text(path)?)?;
    if m.format != MANIFEST_FORMAT {
        return Err(Error::Format(format!(
            "expected format `{MANIFEST_FORMAT}`, found `{}`",
            m.format
        )));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptation::adapt_successive;
    use crate::testbeds::{generate_dataset, RidgeSpec, Testbed};

    fn small_run() -> (crate::Dataset, AdaptConfig, Vec<AdaptedExpansion>) {
        let data = generate_dataset(&Testbed::Ridge(RidgeSpec::new(4).unwrap()), 40, 2).unwrap();
        let config = AdaptConfig {
            restarts: 2,
            seed: 4,
            ..AdaptConfig::default()
        };
        let runs = adapt_successive(&data, 2, 2, &config).unwrap();
        (data, config, runs)
    }

    #[test]
    fn expansion_round_trip() {
        let (data, _, runs) = small_run();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.json");
        write_expansion(&runs[1], &path).unwrap();
        let back = read_expansion(&path).unwrap();
        assert_eq!(back.projection, runs[1].projection);
        assert_eq!(back.expansion.coefficients(), runs[1].expansion.coefficients());
        assert_eq!(back.residual_on(&data).unwrap(), runs[1].residual_on(&data).unwrap());
    }

    #[test]
    fn expansion_document_validated() {
        let (_, _, runs) = small_run();
        let mut doc = ExpansionDocument::from_adapted(&runs[0]);
        doc.format = "other/9".into();
        assert!(doc.clone().into_adapted().is_err());
        let mut doc = ExpansionDocument::from_adapted(&runs[1]);
        doc.multi_indices.swap(1, 2);
        assert!(doc.into_adapted().is_err());
        let mut doc = ExpansionDocument::from_adapted(&runs[0]);
        doc.projection[0][0] += 0.1;
        assert!(doc.into_adapted().is_err());
    }

    #[test]
    fn manifest_round_trip_and_match() {
        let (data, config, runs) = small_run();
        let m = RunManifest::new(&config, 2, &data, None, &runs);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        write_manifest(&m, &path).unwrap();
        let back = read_manifest(&path).unwrap();
        assert_eq!(back, m);
        let again = adapt_successive(&data, back.max_reduced, back.order, &back.config).unwrap();
        assert!(back.matches(&again));
        assert!(!back.matches(&again[..1]));
    }
}

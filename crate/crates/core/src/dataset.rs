use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Input points (one per row) paired with scalar observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: DMatrix<f64>,
    outputs: DVector<f64>,
}

impl Dataset {
    pub fn new(inputs: DMatrix<f64>, outputs: DVector<f64>) -> Result<Self> {
        if inputs.nrows() != outputs.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.nrows(),
                actual: outputs.len(),
                context: "input rows vs outputs",
            });
        }
        if inputs.nrows() == 0 || inputs.ncols() == 0 {
            return Err(Error::InvalidArgument("dataset must have at least one row and column".into()));
        }
        if inputs.iter().chain(outputs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("dataset contains non-finite values".into()));
        }
        Ok(Dataset { inputs, outputs })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn outputs(&self) -> &DVector<f64> {
        &self.outputs
    }

    /// Rows `rows` (in the given order) as a new dataset.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let inputs = self.inputs.select_rows(rows.iter());
        let outputs = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.outputs[i]));
        Dataset::new(inputs, outputs)
    }

    /// SHA-256 over the little-endian bytes of shape and values.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.len() as u64).to_le_bytes());
        h.update((self.dimension() as u64).to_le_bytes());
        for i in 0..self.len() {
            for v in self.inputs.row(i).iter() {
                h.update(v.to_le_bytes());
            }
            h.update(self.outputs[i].to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

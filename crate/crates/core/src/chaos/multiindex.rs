//! Total-degree multi-index sets in graded lexicographic order.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-dimension polynomial orders of one tensor-product basis function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(dimension: usize) -> Self {
        MultiIndex(vec![0; dimension])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|α| = Σ α_i`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// The same index with one extra trailing zero entry.
    pub fn padded(&self, dimension: usize) -> Self {
        let mut entries = self.0.clone();
        entries.resize(dimension.max(self.0.len()), 0);
        MultiIndex(entries)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Number of multi-indices of dimension `d` with total degree at most `q`,
/// i.e. `(d+q)! / (d! q!)`.
pub fn count_basis(dimension: usize, order: usize) -> Result<usize> {
    if dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let overflow = || Error::BasisOverflow { dimension, order };
    // Each partial product is itself a binomial coefficient, so the division is exact.
    let mut acc: u128 = 1;
    for i in 1..=order as u128 {
        acc = acc
            .checked_mul(dimension as u128 + i)
            .ok_or_else(overflow)?
            / i;
    }
    usize::try_from(acc).map_err(|_| overflow())
}

/// Ordered set 𝒥_Q^d of all multi-indices with `|α| ≤ Q`.
///
/// Ordering is graded (ascending total degree), then ascending lexicographic
/// within a degree, so index 0 is always the zero multi-index. For `d = 2`,
/// `Q = 1` the order is `(0,0), (0,1), (1,0)`.
#[derive(Debug, Clone)]
pub struct MultiIndexSet {
    dimension: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
    // decrements[j * dimension + i] = position of indices[j] - e_i
    decrements: Vec<Option<usize>>,
}

impl MultiIndexSet {
    pub fn total_degree(dimension: usize, order: usize) -> Result<Self> {
        let expected = count_basis(dimension, order)?;
        let mut indices = Vec::with_capacity(expected);
        let mut scratch = vec![0u32; dimension];
        for degree in 0..=order as u32 {
            compositions(degree, 0, &mut scratch, &mut indices);
        }
        debug_assert_eq!(indices.len(), expected);
        Ok(Self::from_ordered(dimension, order, indices))
    }

    fn from_ordered(dimension: usize, order: usize, indices: Vec<MultiIndex>) -> Self {
        let positions: HashMap<MultiIndex, usize> = indices
            .iter()
            .enumerate()
            .map(|(j, a)| (a.clone(), j))
            .collect();
        let mut decrements = Vec::with_capacity(indices.len() * dimension);
        for alpha in &indices {
            for i in 0..dimension {
                if alpha.0[i] == 0 {
                    decrements.push(None);
                } else {
                    let mut lower = alpha.clone();
                    lower.0[i] -= 1;
                    decrements.push(positions.get(&lower).copied());
                }
            }
        }
        MultiIndexSet {
            dimension,
            order,
            indices,
            positions,
            decrements,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, position: usize) -> Option<&MultiIndex> {
        self.indices.get(position)
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.positions.get(alpha).copied()
    }

    /// Position of `indices[j] - e_i`, or `None` when `indices[j]` has a zero
    /// in slot `i`.
    pub fn decrement(&self, j: usize, i: usize) -> Option<usize> {
        self.decrements[j * self.dimension + i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }
}

impl PartialEq for MultiIndexSet {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.order == other.order
    }
}

fn compositions(remaining: u32, slot: usize, scratch: &mut [u32], out: &mut Vec<MultiIndex>) {
    if slot + 1 == scratch.len() {
        scratch[slot] = remaining;
        out.push(MultiIndex(scratch.to_vec()));
        return;
    }
    for head in 0..=remaining {
        scratch[slot] = head;
        compositions(remaining - head, slot + 1, scratch, out);
    }
}

//! Exact brute-force nearest-neighbor search, the ground truth for recall
//! and equivalence checks.

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// The exact k nearest neighbors of a query, ascending by (distance, id).
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub entries: Vec<(u64, f64)>,
}

/// Euclidean distance between two equal-length vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(euclidean_unchecked(a, b))
}

pub(crate) fn euclidean_unchecked(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        let diff = a[i] - b[i];
        acc += diff * diff;
    }
    acc.sqrt()
}

/// Scans the whole dataset and returns the min(k, n) nearest points,
/// ascending by distance with ties broken by ascending id.
pub fn knn_exact(dataset: &Dataset, vector: &[f64], k: usize) -> Result<ExactResult> {
    if vector.len() != dataset.d() {
        return Err(Error::DimensionMismatch {
            expected: dataset.d(),
            found: vector.len(),
        });
    }
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    let mut entries: Vec<(u64, f64)> = (0..dataset.n())
        .map(|row| (dataset.id_at(row), euclidean_unchecked(vector, dataset.row(row))))
        .collect();
    entries.sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    entries.truncate(k);
    Ok(ExactResult { entries })
}

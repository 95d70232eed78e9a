//! Random-projection locality-sensitive hashing for approximate
//! nearest-neighbor search over dense feature vectors.
//!
//! An index hashes each vector into one bucket per table by signing its
//! dot products with seeded Gaussian hyperplanes; queries retrieve and
//! rank only the members of the buckets they hash to. The crate also
//! ships the exact brute-force oracle, evaluation metrics, a grid
//! benchmark harness, and bit-exact dataset/index persistence.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod index;
pub mod oracle;
pub mod persist;
pub mod projection;
pub mod signature;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use eval::{
    monotonicity_accuracy, recall_at_k, run_benchmark, BenchGrid, BenchOutcome, BenchRecord,
    Experiment, SkippedCell,
};
pub use index::{CandidateList, IndexParams, LshIndex, RankSpace};
pub use oracle::{euclidean, knn_exact, ExactResult};
pub use persist::{load_dataset, load_index, save_dataset, save_index};
pub use projection::{Provenance, ProjectionSet};
pub use signature::{BitSignature, BucketKey};

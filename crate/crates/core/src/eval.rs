//! Evaluation metrics (ranking monotonicity, recall against the exact
//! oracle) and the grid benchmark harness behind the CLI `bench`
//! subcommand.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::index::{CandidateList, IndexParams, LshIndex, RankSpace};
use crate::oracle::{euclidean_unchecked, knn_exact, ExactResult};

/// RNG stream used for drawing query rows. Table streams are the table
/// indices, so this can never collide with one.
const QUERY_STREAM: u64 = u64::MAX;

/// What a benchmark record measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    BuildTime,
    QueryTime,
    Accuracy,
    Recall,
    CandidateCount,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Experiment::BuildTime => "build_time",
            Experiment::QueryTime => "query_time",
            Experiment::Accuracy => "accuracy",
            Experiment::Recall => "recall",
            Experiment::CandidateCount => "candidate_count",
        };
        f.write_str(name)
    }
}

/// One measured value for one grid cell. Timing values are seconds;
/// accuracy and recall are fractions in [0, 1]; candidate counts are mean
/// pre-truncation candidates per query.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub experiment: Experiment,
    pub hash_size: usize,
    pub num_tables: usize,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub queries: usize,
    pub value: f64,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str = "experiment,hash_size,num_tables,n,d,seed,queries,value";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.experiment,
            self.hash_size,
            self.num_tables,
            self.n,
            self.d,
            self.seed,
            self.queries,
            self.value
        )
    }
}

/// The sweep axes of a benchmark run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchGrid {
    pub hash_sizes: Vec<usize>,
    pub num_tables: Vec<usize>,
}

/// A grid cell that was rejected instead of run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedCell {
    pub hash_size: usize,
    pub num_tables: usize,
    pub reason: String,
}

/// Records for every valid cell plus the cells that were rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub records: Vec<BenchRecord>,
    pub skipped: Vec<SkippedCell>,
}

/// Fraction of adjacent candidate pairs whose distances to the query,
/// recomputed in the original d-dim space, are non-decreasing along the
/// ranked list. Lists with fewer than two candidates score 1.0.
pub fn monotonicity_accuracy(
    candidates: &CandidateList,
    dataset: &Dataset,
    query: &[f64],
) -> Result<f64> {
    if query.len() != dataset.d() {
        return Err(Error::DimensionMismatch {
            expected: dataset.d(),
            found: query.len(),
        });
    }
    let mut original: Vec<f64> = Vec::with_capacity(candidates.entries.len());
    for &(id, _) in &candidates.entries {
        let row = dataset.row_of_id(id).ok_or(Error::UnknownId(id))?;
        original.push(euclidean_unchecked(query, dataset.row(row)));
    }
    if original.len() < 2 {
        return Ok(1.0);
    }
    let ordered = original.windows(2).filter(|w| w[0] <= w[1]).count();
    Ok(ordered as f64 / (original.len() - 1) as f64)
}

/// |top-k candidate ids ∩ top-k exact ids| / min(k, exact.len()).
/// An empty exact result scores 1.0 (nothing to find).
pub fn recall_at_k(candidates: &CandidateList, exact: &ExactResult, k: usize) -> f64 {
    let denom = k.min(exact.entries.len());
    if denom == 0 {
        return 1.0;
    }
    let exact_top: Vec<u64> = exact.entries.iter().take(k).map(|e| e.0).collect();
    let hits = candidates
        .entries
        .iter()
        .take(k)
        .filter(|(id, _)| exact_top.contains(id))
        .count();
    hits as f64 / denom as f64
}

/// Drops the query's own id from a candidate list and re-truncates to k.
/// Used when query points are drawn from the indexed dataset, where the
/// guaranteed distance-zero self match would inflate every metric.
pub fn without_self(mut candidates: CandidateList, self_id: u64, k: usize) -> CandidateList {
    candidates.entries.retain(|&(id, _)| id != self_id);
    candidates.entries.truncate(k);
    candidates
}

/// Counterpart of [`without_self`] for exact results.
pub fn exact_without_self(mut exact: ExactResult, self_id: u64, k: usize) -> ExactResult {
    exact.entries.retain(|&(id, _)| id != self_id);
    exact.entries.truncate(k);
    exact
}

/// The query rows a benchmark with this seed will use, drawn with
/// replacement from the dataset rows. The same rows serve every grid cell.
pub fn sample_query_rows(n: usize, num_queries: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(QUERY_STREAM);
    (0..num_queries).map(|_| rng.random_range(0..n)).collect()
}

/// Sweeps the grid: for every (hash_size, num_tables) cell, builds an
/// index (timed, after one untimed warm-up build) and runs the seeded
/// queries (timed, after one untimed warm-up query), measuring per-table
/// build seconds, mean query seconds, mean pre-truncation candidate
/// count, mean monotonicity accuracy, and mean recall@k against the exact
/// oracle — the latter three with the self match removed. Cells with
/// invalid parameters are reported in `skipped` and do not abort the
/// sweep. Everything except the two timing experiments is deterministic
/// in (dataset, grid, num_queries, k, seed).
pub fn run_benchmark(
    dataset: &Dataset,
    grid: &BenchGrid,
    num_queries: usize,
    k: usize,
    seed: u64,
) -> Result<BenchOutcome> {
    if grid.hash_sizes.is_empty() || grid.num_tables.is_empty() {
        return Err(Error::param("benchmark grid must not be empty"));
    }
    if num_queries == 0 {
        return Err(Error::param("query count must be at least 1"));
    }
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }

    let query_rows = sample_query_rows(dataset.n(), num_queries, seed);
    // Exact neighbors depend only on the query row, not the grid cell.
    let exact_per_query: Vec<ExactResult> = query_rows
        .iter()
        .map(|&row| {
            let full = knn_exact(dataset, dataset.row(row), k + 1)?;
            Ok(exact_without_self(full, dataset.id_at(row), k))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for &hash_size in &grid.hash_sizes {
        for &num_tables in &grid.num_tables {
            let params = IndexParams {
                hash_size,
                num_tables,
                seed,
                rank_space: RankSpace::Projected,
            };
            if let Err(e) = params.validate() {
                skipped.push(SkippedCell {
                    hash_size,
                    num_tables,
                    reason: e.to_string(),
                });
                continue;
            }
            let cell = run_cell(dataset, params, &query_rows, &exact_per_query, k)?;
            let mut emit = |experiment, value| {
                records.push(BenchRecord {
                    experiment,
                    hash_size,
                    num_tables,
                    n: dataset.n(),
                    d: dataset.d(),
                    seed,
                    queries: num_queries,
                    value,
                });
            };
            emit(Experiment::BuildTime, cell.build_secs_per_table);
            emit(Experiment::QueryTime, cell.mean_query_secs);
            emit(Experiment::Accuracy, cell.mean_accuracy);
            emit(Experiment::Recall, cell.mean_recall);
            emit(Experiment::CandidateCount, cell.mean_candidates);
        }
    }
    records.sort_by(|a, b| {
        (a.hash_size, a.num_tables, a.experiment).cmp(&(b.hash_size, b.num_tables, b.experiment))
    });
    Ok(BenchOutcome { records, skipped })
}

struct CellStats {
    build_secs_per_table: f64,
    mean_query_secs: f64,
    mean_candidates: f64,
    mean_accuracy: f64,
    mean_recall: f64,
}

fn run_cell(
    dataset: &Dataset,
    params: IndexParams,
    query_rows: &[usize],
    exact_per_query: &[ExactResult],
    k: usize,
) -> Result<CellStats> {
    // Warm-up build, then the timed one.
    drop(LshIndex::build(dataset, params, None)?);
    let start = Instant::now();
    let index = LshIndex::build(dataset, params, None)?;
    let build_secs = start.elapsed().as_secs_f64();

    // Warm-up query.
    let _ = index.query(dataset.row(query_rows[0]), k + 1)?;

    let mut query_secs = 0.0;
    let mut candidates_total = 0.0;
    let mut accuracy_total = 0.0;
    let mut recall_total = 0.0;
    for (&row, exact) in query_rows.iter().zip(exact_per_query) {
        let query = dataset.row(row);
        // k + 1 leaves k candidates once the self match is dropped.
        let start = Instant::now();
        let result = index.query(query, k + 1)?;
        query_secs += start.elapsed().as_secs_f64();

        candidates_total += result.candidates_examined as f64;
        let pruned = without_self(result, dataset.id_at(row), k);
        accuracy_total += monotonicity_accuracy(&pruned, dataset, query)?;
        recall_total += recall_at_k(&pruned, exact, k);
    }
    let queries = query_rows.len() as f64;
    Ok(CellStats {
        build_secs_per_table: build_secs / params.num_tables as f64,
        mean_query_secs: query_secs / queries,
        mean_candidates: candidates_total / queries,
        mean_accuracy: accuracy_total / queries,
        mean_recall: recall_total / queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::RankSpace;
    use crate::projection::ProjectionSet;

    /// Points on a line so distances to the origin are the coordinates.
    fn line_dataset(coords: &[f64]) -> Dataset {
        Dataset::new(
            (1..=coords.len() as u64).collect(),
            coords.to_vec(),
            1,
        )
        .unwrap()
    }

    fn list(entries: Vec<(u64, f64)>) -> CandidateList {
        CandidateList {
            query: vec![0.0],
            entries,
            rank_space: RankSpace::Projected,
            tables_hit: 1,
            candidates_examined: 0,
        }
    }

    #[test]
    fn fully_monotone_list_scores_one() {
        let ds = line_dataset(&[1.0, 2.0, 3.0]);
        let cands = list(vec![(1, 0.0), (2, 0.0), (3, 0.0)]);
        assert_eq!(monotonicity_accuracy(&cands, &ds, &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn one_of_two_ordered_pairs_scores_half() {
        let ds = line_dataset(&[1.0, 2.0, 3.0]);
        // Ranked ids visit original distances (2, 1, 3).
        let cands = list(vec![(2, 0.0), (1, 0.0), (3, 0.0)]);
        assert_eq!(monotonicity_accuracy(&cands, &ds, &[0.0]).unwrap(), 0.5);
    }

    #[test]
    fn short_lists_score_one() {
        let ds = line_dataset(&[1.0]);
        assert_eq!(
            monotonicity_accuracy(&list(vec![]), &ds, &[0.0]).unwrap(),
            1.0
        );
        assert_eq!(
            monotonicity_accuracy(&list(vec![(1, 0.0)]), &ds, &[0.0]).unwrap(),
            1.0
        );
    }

    #[test]
    fn unknown_candidate_id_is_rejected() {
        let ds = line_dataset(&[1.0]);
        assert!(matches!(
            monotonicity_accuracy(&list(vec![(9, 0.0)]), &ds, &[0.0]).unwrap_err(),
            Error::UnknownId(9)
        ));
    }

    #[test]
    fn recall_on_identical_lists_is_one() {
        let exact = ExactResult {
            entries: vec![(1, 0.1), (2, 0.2), (3, 0.3)],
        };
        let cands = list(vec![(1, 0.1), (2, 0.2), (3, 0.3)]);
        assert_eq!(recall_at_k(&cands, &exact, 3), 1.0);
    }

    #[test]
    fn recall_on_disjoint_lists_is_zero() {
        let exact = ExactResult {
            entries: vec![(1, 0.1), (2, 0.2)],
        };
        let cands = list(vec![(8, 0.1), (9, 0.2)]);
        assert_eq!(recall_at_k(&cands, &exact, 2), 0.0);
    }

    #[test]
    fn recall_ignores_order_within_top_k() {
        let exact = ExactResult {
            entries: vec![(1, 0.1), (2, 0.2), (3, 0.3)],
        };
        let cands = list(vec![(3, 0.0), (1, 0.1), (2, 0.2)]);
        assert_eq!(recall_at_k(&cands, &exact, 3), 1.0);
    }

    #[test]
    fn original_rank_space_is_always_monotone() {
        let ds = Dataset::generate_synthetic(200, 6, 4, 1.0, 3).unwrap();
        let params = IndexParams::new(4, 2, 9).with_rank_space(RankSpace::Original);
        let index = LshIndex::build(&ds, params, None).unwrap();
        for row in [0, 17, 56, 140] {
            let cands = index.query(ds.row(row), 20).unwrap();
            assert_eq!(
                monotonicity_accuracy(&cands, &ds, ds.row(row)).unwrap(),
                1.0
            );
        }
    }

    #[test]
    fn zero_projection_original_rank_has_perfect_recall() {
        let ds = Dataset::generate_synthetic(80, 5, 2, 1.0, 6).unwrap();
        let params = IndexParams::new(3, 2, 0).with_rank_space(RankSpace::Original);
        let zeros = ProjectionSet::from_matrices(
            5,
            &params,
            vec![vec![vec![0.0; 5]; 3]; 2],
        )
        .unwrap();
        let index = LshIndex::build(&ds, params, Some(zeros)).unwrap();
        for row in [0, 11, 42] {
            for k in [1, 5, 10] {
                let cands = index.query(ds.row(row), k).unwrap();
                let exact = knn_exact(&ds, ds.row(row), k).unwrap();
                assert_eq!(recall_at_k(&cands, &exact, k), 1.0);
            }
        }
    }

    #[test]
    fn emits_five_records_per_cell() {
        let ds = Dataset::generate_synthetic(200, 8, 4, 1.0, 1).unwrap();
        let grid = BenchGrid {
            hash_sizes: vec![4],
            num_tables: vec![1],
        };
        let outcome = run_benchmark(&ds, &grid, 10, 10, 1).unwrap();
        assert_eq!(outcome.records.len(), 5);
        assert!(outcome.skipped.is_empty());
        let experiments: Vec<Experiment> =
            outcome.records.iter().map(|r| r.experiment).collect();
        assert_eq!(
            experiments,
            vec![
                Experiment::BuildTime,
                Experiment::QueryTime,
                Experiment::Accuracy,
                Experiment::Recall,
                Experiment::CandidateCount
            ]
        );
        for record in &outcome.records {
            match record.experiment {
                Experiment::Accuracy | Experiment::Recall => {
                    assert!((0.0..=1.0).contains(&record.value));
                }
                _ => assert!(record.value >= 0.0),
            }
        }
    }

    #[test]
    fn invalid_cells_are_skipped_not_fatal() {
        let ds = Dataset::generate_synthetic(100, 4, 2, 1.0, 1).unwrap();
        let grid = BenchGrid {
            hash_sizes: vec![0, 4],
            num_tables: vec![1],
        };
        let outcome = run_benchmark(&ds, &grid, 5, 10, 1).unwrap();
        assert_eq!(outcome.skipped.len(), 1);
        assert_eq!(outcome.skipped[0].hash_size, 0);
        assert_eq!(outcome.records.len(), 5);
        assert!(outcome.records.iter().all(|r| r.hash_size == 4));
    }

    #[test]
    fn records_are_sorted_regardless_of_grid_order() {
        let ds = Dataset::generate_synthetic(100, 4, 2, 1.0, 1).unwrap();
        let grid = BenchGrid {
            hash_sizes: vec![8, 2],
            num_tables: vec![2, 1],
        };
        let outcome = run_benchmark(&ds, &grid, 5, 10, 1).unwrap();
        let keys: Vec<(usize, usize, Experiment)> = outcome
            .records
            .iter()
            .map(|r| (r.hash_size, r.num_tables, r.experiment))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn non_timing_values_are_reproducible() {
        let ds = Dataset::generate_synthetic(300, 8, 4, 1.0, 2).unwrap();
        let grid = BenchGrid {
            hash_sizes: vec![4, 8],
            num_tables: vec![1, 2],
        };
        let a = run_benchmark(&ds, &grid, 20, 10, 5).unwrap();
        let b = run_benchmark(&ds, &grid, 20, 10, 5).unwrap();
        let strip_timing = |outcome: &BenchOutcome| -> Vec<(Experiment, usize, usize, u64)> {
            outcome
                .records
                .iter()
                .filter(|r| {
                    !matches!(
                        r.experiment,
                        Experiment::BuildTime | Experiment::QueryTime
                    )
                })
                .map(|r| {
                    (
                        r.experiment,
                        r.hash_size,
                        r.num_tables,
                        r.value.to_bits(),
                    )
                })
                .collect()
        };
        assert_eq!(strip_timing(&a), strip_timing(&b));
    }

    #[test]
    fn rejects_empty_grid_and_zero_queries() {
        let ds = Dataset::generate_synthetic(10, 2, 1, 1.0, 0).unwrap();
        let empty = BenchGrid {
            hash_sizes: vec![],
            num_tables: vec![1],
        };
        assert!(run_benchmark(&ds, &empty, 5, 10, 0).is_err());
        let grid = BenchGrid {
            hash_sizes: vec![2],
            num_tables: vec![1],
        };
        assert!(run_benchmark(&ds, &grid, 0, 10, 0).is_err());
    }

    #[test]
    fn self_match_removal_drops_only_the_query_id() {
        let cands = list(vec![(1, 0.0), (2, 0.5), (3, 0.7)]);
        let pruned = without_self(cands, 1, 1);
        assert_eq!(pruned.entries, vec![(2, 0.5)]);
        let exact = ExactResult {
            entries: vec![(1, 0.0), (2, 0.5)],
        };
        let pruned = exact_without_self(exact, 1, 5);
        assert_eq!(pruned.entries, vec![(2, 0.5)]);
    }
}

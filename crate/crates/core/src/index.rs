//! The multi-table LSH index.
//!
//! Building hashes every dataset row into one bucket per table: project
//! through that table's hyperplanes, take sign bits, pack them into a
//! bucket key. Querying hashes the query the same way, collects the
//! members of each table's matching bucket, ranks them by distance in the
//! configured rank space, and returns the k best.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::oracle::euclidean_unchecked;
use crate::projection::ProjectionSet;
use crate::signature::{BitSignature, BucketKey};

/// The space in which query candidates are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankSpace {
    /// Rank by Euclidean distance between per-table projected coordinates;
    /// a candidate found in several tables keeps its minimum distance.
    #[default]
    Projected,
    /// Rank by Euclidean distance between the original d-dim vectors.
    Original,
}

/// Build-time configuration of an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexParams {
    /// Hyperplanes per table; also the signature length and the projected
    /// dimension.
    pub hash_size: usize,
    pub num_tables: usize,
    pub seed: u64,
    pub rank_space: RankSpace,
}

impl IndexParams {
    pub fn new(hash_size: usize, num_tables: usize, seed: u64) -> Self {
        IndexParams {
            hash_size,
            num_tables,
            seed,
            rank_space: RankSpace::default(),
        }
    }

    pub fn with_rank_space(mut self, rank_space: RankSpace) -> Self {
        self.rank_space = rank_space;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.hash_size == 0 {
            return Err(Error::param("hash size must be at least 1"));
        }
        if self.num_tables == 0 {
            return Err(Error::param("table count must be at least 1"));
        }
        Ok(())
    }
}

type BucketMap = BTreeMap<BucketKey, Vec<u64>>;

/// A built index: per-table bucket maps plus the projections that defined
/// them. Immutable once built; queries may run concurrently.
#[derive(Clone, PartialEq)]
pub struct LshIndex<'a> {
    params: IndexParams,
    projections: ProjectionSet,
    tables: Vec<BucketMap>,
    dataset: &'a Dataset,
    /// Per table, the n x hash_size projected coordinates (row-major),
    /// kept only when ranking in projected space.
    projected_cache: Option<Vec<Vec<f64>>>,
}

impl std::fmt::Debug for LshIndex<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LshIndex")
            .field("params", &self.params)
            .field("n", &self.dataset.n())
            .field("d", &self.dataset.d())
            .field(
                "buckets_per_table",
                &self.tables.iter().map(BucketMap::len).collect::<Vec<_>>(),
            )
            .finish_non_exhaustive()
    }
}

/// Ranked result of one query.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    /// The query vector the list answers.
    pub query: Vec<f64>,
    /// (id, distance) ascending by distance, ties by ascending id.
    pub entries: Vec<(u64, f64)>,
    pub rank_space: RankSpace,
    /// Tables whose bucket for the query existed (a present bucket is
    /// never empty).
    pub tables_hit: usize,
    /// Distinct candidates collected across tables before truncation to k.
    pub candidates_examined: usize,
}

impl<'a> LshIndex<'a> {
    /// Hashes every dataset row into its bucket in every table
    /// (deterministic for fixed inputs). Projections are generated from
    /// `params` unless an explicit set is supplied, in which case its
    /// shape must match.
    pub fn build(
        dataset: &'a Dataset,
        params: IndexParams,
        projections: Option<ProjectionSet>,
    ) -> Result<Self> {
        params.validate()?;
        let projections = match projections {
            Some(p) => {
                if p.dim() != dataset.d() {
                    return Err(Error::DimensionMismatch {
                        expected: dataset.d(),
                        found: p.dim(),
                    });
                }
                if p.hash_size() != params.hash_size || p.num_tables() != params.num_tables {
                    return Err(Error::param(format!(
                        "projection set shape ({} tables of {} hyperplanes) does not match params ({} tables of {})",
                        p.num_tables(),
                        p.hash_size(),
                        params.num_tables,
                        params.hash_size
                    )));
                }
                p
            }
            None => ProjectionSet::generate(dataset.d(), &params)?,
        };

        let mut tables = Vec::with_capacity(params.num_tables);
        let mut projected_cache = if params.rank_space == RankSpace::Projected {
            Some(Vec::with_capacity(params.num_tables))
        } else {
            None
        };
        for table in 0..params.num_tables {
            let (buckets, projected) = hash_table(dataset, &projections, table)?;
            tables.push(buckets);
            if let Some(cache) = projected_cache.as_mut() {
                cache.push(projected);
            }
        }

        Ok(LshIndex {
            params,
            projections,
            tables,
            dataset,
            projected_cache,
        })
    }

    /// Reassembles an index from parts read back from a file, recomputing
    /// the projected cache when needed.
    pub(crate) fn from_parts(
        dataset: &'a Dataset,
        params: IndexParams,
        projections: ProjectionSet,
        tables: Vec<BucketMap>,
    ) -> Result<Self> {
        let projected_cache = if params.rank_space == RankSpace::Projected {
            let mut cache = Vec::with_capacity(params.num_tables);
            for table in 0..params.num_tables {
                cache.push(project_all(dataset, &projections, table)?);
            }
            Some(cache)
        } else {
            None
        };
        Ok(LshIndex {
            params,
            projections,
            tables,
            dataset,
            projected_cache,
        })
    }

    pub fn params(&self) -> &IndexParams {
        &self.params
    }

    pub fn projections(&self) -> &ProjectionSet {
        &self.projections
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn num_tables(&self) -> usize {
        self.tables.len()
    }

    /// The bucket map of one table.
    pub fn table(&self, table: usize) -> &BTreeMap<BucketKey, Vec<u64>> {
        &self.tables[table]
    }

    /// The bucket key of an arbitrary vector in one table.
    pub fn key_for(&self, table: usize, vector: &[f64]) -> Result<BucketKey> {
        let projected = self.projections.project(table, vector)?;
        Ok(BucketKey::from_signature(&BitSignature::from_projected(
            &projected,
        )))
    }

    /// Looks up the query's bucket in every table, merges the members,
    /// ranks them in the index's rank space (ascending distance, ties by
    /// ascending id), and keeps the k best. Tables without a matching
    /// bucket contribute nothing; if none match, the list is empty.
    pub fn query(&self, vector: &[f64], k: usize) -> Result<CandidateList> {
        if vector.len() != self.dataset.d() {
            return Err(Error::DimensionMismatch {
                expected: self.dataset.d(),
                found: vector.len(),
            });
        }
        if k == 0 {
            return Err(Error::param("k must be at least 1"));
        }

        let mut merged: HashMap<u64, f64> = HashMap::new();
        let mut tables_hit = 0;
        for table in 0..self.tables.len() {
            let projected = self.projections.project(table, vector)?;
            let key = BucketKey::from_signature(&BitSignature::from_projected(&projected));
            let Some(members) = self.tables[table].get(&key) else {
                continue;
            };
            tables_hit += 1;
            match self.params.rank_space {
                RankSpace::Projected => {
                    let cache = self
                        .projected_cache
                        .as_ref()
                        .expect("projected cache exists when ranking in projected space");
                    let rows = &cache[table];
                    let h = self.params.hash_size;
                    for &id in members {
                        let row = self.dataset.row_of_id(id).expect("bucket ids are indexed");
                        let dist = euclidean_unchecked(&projected, &rows[row * h..(row + 1) * h]);
                        merged
                            .entry(id)
                            .and_modify(|d| *d = d.min(dist))
                            .or_insert(dist);
                    }
                }
                RankSpace::Original => {
                    for &id in members {
                        merged.entry(id).or_insert_with(|| {
                            let row =
                                self.dataset.row_of_id(id).expect("bucket ids are indexed");
                            euclidean_unchecked(vector, self.dataset.row(row))
                        });
                    }
                }
            }
        }

        let mut entries: Vec<(u64, f64)> = merged.into_iter().collect();
        entries.sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let candidates_examined = entries.len();
        entries.truncate(k);
        Ok(CandidateList {
            query: vector.to_vec(),
            entries,
            rank_space: self.params.rank_space,
            tables_hit,
            candidates_examined,
        })
    }
}

/// Projects all rows through one table and groups ids by bucket key.
fn hash_table(
    dataset: &Dataset,
    projections: &ProjectionSet,
    table: usize,
) -> Result<(BucketMap, Vec<f64>)> {
    let h = projections.hash_size();
    let projected = project_all(dataset, projections, table)?;
    let mut buckets = BucketMap::new();
    for row in 0..dataset.n() {
        let key = BucketKey::from_signature(&BitSignature::from_projected(
            &projected[row * h..(row + 1) * h],
        ));
        buckets.entry(key).or_default().push(dataset.id_at(row));
    }
    Ok((buckets, projected))
}

/// Row-major n x hash_size projected coordinates of every dataset row.
/// Rows are processed in parallel; the output is identical to a sequential
/// pass.
fn project_all(
    dataset: &Dataset,
    projections: &ProjectionSet,
    table: usize,
) -> Result<Vec<f64>> {
    let h = projections.hash_size();
    let rows: Vec<Vec<f64>> = (0..dataset.n())
        .into_par_iter()
        .map(|row| projections.project(table, dataset.row(row)))
        .collect::<Result<_>>()?;
    let mut flat = Vec::with_capacity(dataset.n() * h);
    for row in rows {
        flat.extend(row);
    }
    Ok(flat)
}

//! Feature-vector datasets: CSV ingestion and seeded synthetic generation.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};

/// An immutable, ordered collection of identified feature vectors.
///
/// Vectors are stored row-major (`n` rows of `d` columns). Every entry is
/// finite and every id is unique; both are enforced at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    ids: Vec<u64>,
    data: Vec<f64>,
    n: usize,
    d: usize,
    id_to_row: HashMap<u64, usize>,
}

impl Dataset {
    /// Builds a dataset from ids and row-major data, validating all
    /// invariants: `ids.len() * d == data.len()`, d ≥ 1, n ≥ 1, unique
    /// ids, finite entries.
    pub fn new(ids: Vec<u64>, data: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        let n = ids.len();
        if n == 0 {
            return Err(Error::param("dataset must contain at least one row"));
        }
        if data.len() != n * d {
            return Err(Error::param(format!(
                "expected {} values for {} rows of dimension {}, found {}",
                n * d,
                n,
                d,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { context: "dataset" });
        }
        let mut id_to_row = HashMap::with_capacity(n);
        for (row, &id) in ids.iter().enumerate() {
            if let Some(first) = id_to_row.insert(id, row) {
                return Err(Error::DuplicateId {
                    id,
                    first_row: first + 1,
                    second_row: row + 1,
                });
            }
        }
        Ok(Dataset {
            ids,
            data,
            n,
            d,
            id_to_row,
        })
    }

    /// Loads a dataset from a flat `id,f1,...,fd` CSV file. A single
    /// header row is skipped when the first field of the first row is
    /// non-numeric.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let contents =
            fs::read_to_string(path).map_err(|e| Error::io("read", path, e))?;
        parse_csv(&contents)
    }

    /// Generates a deterministic clustered dataset: `clusters` centers
    /// drawn uniformly in `[-10, 10]^d`, points assigned round-robin and
    /// offset by Gaussian noise with standard deviation `spread`. Ids are
    /// `0..n-1`. Repeat calls with equal arguments are bit-identical.
    pub fn generate_synthetic(
        n: usize,
        d: usize,
        clusters: usize,
        spread: f64,
        seed: u64,
    ) -> Result<Self> {
        if clusters == 0 {
            return Err(Error::param("clusters must be at least 1"));
        }
        if n < clusters {
            return Err(Error::param(format!(
                "n ({n}) must be at least the cluster count ({clusters})"
            )));
        }
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        if !spread.is_finite() || spread < 0.0 {
            return Err(Error::param("spread must be a finite non-negative real"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center_dist = Uniform::new_inclusive(-10.0, 10.0).expect("valid bounds");
        let centers: Vec<f64> = (0..clusters * d)
            .map(|_| center_dist.sample(&mut rng))
            .collect();
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            let center = &centers[(i % clusters) * d..(i % clusters) * d + d];
            for &c in center {
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(c + spread * z);
            }
        }
        Dataset::new((0..n as u64).collect(), data, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    /// The id of row `row`.
    pub fn id_at(&self, row: usize) -> u64 {
        self.ids[row]
    }

    /// The feature vector stored at row `row`.
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.d..(row + 1) * self.d]
    }

    /// The row position of `id`, if present.
    pub fn row_of_id(&self, id: u64) -> Option<usize> {
        self.id_to_row.get(&id).copied()
    }

    /// The feature vector of `id`, if present.
    pub fn vector(&self, id: u64) -> Option<&[f64]> {
        self.row_of_id(id).map(|row| self.row(row))
    }
}

fn parse_csv(contents: &str) -> Result<Dataset> {
    let mut ids: Vec<u64> = Vec::new();
    let mut data: Vec<f64> = Vec::new();
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut expected_cols: Option<usize> = None;

    for (idx, raw) in contents.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let fields: Vec<&str> = line.split(',').collect();

        match expected_cols {
            None => {
                expected_cols = Some(fields.len());
                if fields.len() < 2 {
                    return Err(Error::param(
                        "csv needs an id column and at least one feature column",
                    ));
                }
                // Header row: first field of the first row is non-numeric.
                if fields[0].trim().parse::<f64>().is_err() {
                    continue;
                }
            }
            Some(expected) => {
                if fields.len() != expected {
                    return Err(Error::RaggedRow {
                        row: line_no,
                        expected,
                        found: fields.len(),
                    });
                }
            }
        }

        let id_field = fields[0].trim();
        let id: u64 = id_field.parse().map_err(|_| Error::InvalidId {
            row: line_no,
            value: id_field.to_string(),
        })?;
        if let Some(&first) = seen.get(&id) {
            return Err(Error::DuplicateId {
                id,
                first_row: first,
                second_row: line_no,
            });
        }
        seen.insert(id, line_no);

        for (col, field) in fields[1..].iter().enumerate() {
            let cell = field.trim();
            let value: f64 = cell.parse().map_err(|_| Error::InvalidFeature {
                row: line_no,
                column: col + 2,
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::InvalidFeature {
                    row: line_no,
                    column: col + 2,
                    value: cell.to_string(),
                });
            }
            data.push(value);
        }
        ids.push(id);
    }

    if ids.is_empty() {
        return Err(Error::EmptyCsv);
    }
    let d = expected_cols.expect("at least one row parsed") - 1;
    Dataset::new(ids, data, d)
}

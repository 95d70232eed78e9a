//! Per-table random projections: each table owns `hash_size` hyperplane
//! normal vectors of dimension `d`, stored as a row-major matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::index::IndexParams;

/// How a projection set came to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    GaussianSeeded,
    Explicit,
}

/// The hyperplane matrices for every table of an index, one
/// `hash_size x d` matrix per table.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet {
    matrices: Vec<Vec<f64>>,
    hash_size: usize,
    dim: usize,
    provenance: Provenance,
}

impl ProjectionSet {
    /// Draws `num_tables` matrices of i.i.d. standard-normal entries.
    /// Table `i` reads an RNG stream derived from `(seed, i)`, so growing
    /// the table count never changes earlier tables' matrices.
    pub fn generate(d: usize, params: &IndexParams) -> Result<Self> {
        params.validate()?;
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        let matrices = (0..params.num_tables)
            .map(|table| {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                rng.set_stream(table as u64);
                (0..params.hash_size * d)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect()
            })
            .collect();
        Ok(ProjectionSet {
            matrices,
            hash_size: params.hash_size,
            dim: d,
            provenance: Provenance::GaussianSeeded,
        })
    }

    /// Wraps explicitly supplied matrices (`num_tables` of
    /// `hash_size x d`), verbatim.
    pub fn from_matrices(
        d: usize,
        params: &IndexParams,
        matrices: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        params.validate()?;
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        if matrices.len() != params.num_tables {
            return Err(Error::param(format!(
                "expected {} matrices, found {}",
                params.num_tables,
                matrices.len()
            )));
        }
        let mut flat = Vec::with_capacity(params.num_tables);
        for (t, matrix) in matrices.into_iter().enumerate() {
            if matrix.len() != params.hash_size {
                return Err(Error::param(format!(
                    "table {t}: expected {} rows, found {}",
                    params.hash_size,
                    matrix.len()
                )));
            }
            let mut rows = Vec::with_capacity(params.hash_size * d);
            for (r, row) in matrix.into_iter().enumerate() {
                if row.len() != d {
                    return Err(Error::param(format!(
                        "table {t}, row {r}: expected {} columns, found {}",
                        d,
                        row.len()
                    )));
                }
                if !row.iter().all(|v| v.is_finite()) {
                    return Err(Error::NonFinite {
                        context: "projection matrix",
                    });
                }
                rows.extend(row);
            }
            flat.push(rows);
        }
        Ok(ProjectionSet {
            matrices: flat,
            hash_size: params.hash_size,
            dim: d,
            provenance: Provenance::Explicit,
        })
    }

    /// Reassembles a set from flat row-major matrices, as read back from
    /// an index file.
    pub(crate) fn from_flat(
        matrices: Vec<Vec<f64>>,
        hash_size: usize,
        dim: usize,
        provenance: Provenance,
    ) -> Self {
        debug_assert!(matrices.iter().all(|m| m.len() == hash_size * dim));
        ProjectionSet {
            matrices,
            hash_size,
            dim,
            provenance,
        }
    }

    pub fn num_tables(&self) -> usize {
        self.matrices.len()
    }

    pub fn hash_size(&self) -> usize {
        self.hash_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// The flat row-major matrix of one table.
    pub fn matrix(&self, table: usize) -> &[f64] {
        &self.matrices[table]
    }

    /// Projects a vector through one table's hyperplanes: entry `i` is the
    /// dot product of hyperplane row `i` with the vector. Rejects inputs
    /// whose projection overflows to a non-finite value.
    pub fn project(&self, table: usize, vector: &[f64]) -> Result<Vec<f64>> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        let matrix = &self.matrices[table];
        let mut out = Vec::with_capacity(self.hash_size);
        for row in 0..self.hash_size {
            let hyperplane = &matrix[row * self.dim..(row + 1) * self.dim];
            let mut dot = 0.0;
            for i in 0..self.dim {
                dot += hyperplane[i] * vector[i];
            }
            if !dot.is_finite() {
                return Err(Error::NonFinite {
                    context: "projected vector",
                });
            }
            out.push(dot);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::IndexParams;

    fn params(hash_size: usize, num_tables: usize, seed: u64) -> IndexParams {
        IndexParams::new(hash_size, num_tables, seed)
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params(2, 2, 9);
        let a = ProjectionSet::generate(3, &p).unwrap();
        let b = ProjectionSet::generate(3, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tables_get_distinct_matrices() {
        let set = ProjectionSet::generate(3, &params(2, 2, 9)).unwrap();
        assert_ne!(set.matrix(0), set.matrix(1));
    }

    #[test]
    fn adding_tables_preserves_existing_ones() {
        let small = ProjectionSet::generate(4, &params(8, 2, 123)).unwrap();
        let large = ProjectionSet::generate(4, &params(8, 5, 123)).unwrap();
        for t in 0..2 {
            assert_eq!(small.matrix(t), large.matrix(t));
        }
    }

    // Moment check computed at test time: 800 draws should look
    // standard-normal.
    #[test]
    fn entries_match_standard_normal_moments() {
        let set = ProjectionSet::generate(50, &params(16, 1, 3)).unwrap();
        let entries = set.matrix(0);
        assert_eq!(entries.len(), 800);
        let mean = entries.iter().sum::<f64>() / entries.len() as f64;
        let var = entries.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / entries.len() as f64;
        assert!(mean.abs() <= 0.15, "sample mean {mean} out of range");
        assert!((var - 1.0).abs() <= 0.25, "sample variance {var} out of range");
    }

    #[test]
    fn explicit_matrices_are_kept_verbatim() {
        let p = params(2, 1, 0);
        let set = ProjectionSet::from_matrices(
            2,
            &p,
            vec![vec![vec![1.0, 0.0], vec![0.5, -0.5]]],
        )
        .unwrap();
        assert_eq!(set.provenance(), Provenance::Explicit);
        assert_eq!(set.matrix(0), &[1.0, 0.0, 0.5, -0.5]);
    }

    #[test]
    fn rejects_shape_mismatches() {
        let p = params(2, 1, 0);
        assert!(ProjectionSet::from_matrices(2, &p, vec![]).is_err());
        assert!(
            ProjectionSet::from_matrices(2, &p, vec![vec![vec![1.0, 0.0]]]).is_err()
        );
        assert!(ProjectionSet::from_matrices(
            2,
            &p,
            vec![vec![vec![1.0], vec![2.0]]]
        )
        .is_err());
    }

    #[test]
    fn rejects_non_finite_entries() {
        let p = params(1, 1, 0);
        assert!(matches!(
            ProjectionSet::from_matrices(1, &p, vec![vec![vec![f64::NAN]]]).unwrap_err(),
            Error::NonFinite { .. }
        ));
    }

    #[test]
    fn projects_by_row_dot_products() {
        let p = params(3, 1, 0);
        let set = ProjectionSet::from_matrices(
            2,
            &p,
            vec![vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]],
        )
        .unwrap();
        assert_eq!(set.project(0, &[1.0, 2.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_vector_projects_to_zero() {
        let set = ProjectionSet::generate(6, &params(4, 1, 5)).unwrap();
        assert_eq!(set.project(0, &[0.0; 6]).unwrap(), vec![0.0; 4]);
    }

    // Independent oracle: index-by-index dot product accumulated into a
    // separate buffer.
    #[test]
    fn matches_naive_dot_product_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let set = ProjectionSet::generate(10, &params(7, 1, 21)).unwrap();
        for _ in 0..25 {
            let v: Vec<f64> = (0..10).map(|_| rng.random_range(-3.0..3.0)).collect();
            let got = set.project(0, &v).unwrap();
            let matrix = set.matrix(0);
            for row in 0..7 {
                let mut expect = 0.0;
                for col in 0..10 {
                    expect += matrix[row * 10 + col] * v[col];
                }
                let rel = (got[row] - expect).abs() / expect.abs().max(1.0);
                assert!(rel <= 1e-12);
            }
        }
    }

    #[test]
    fn rejects_overflowing_projection() {
        let p = params(1, 1, 0);
        let set =
            ProjectionSet::from_matrices(2, &p, vec![vec![vec![1e308, 1e308]]]).unwrap();
        assert!(matches!(
            set.project(0, &[1e308, 1e308]).unwrap_err(),
            Error::NonFinite { .. }
        ));
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let set = ProjectionSet::generate(3, &params(2, 1, 1)).unwrap();
        assert!(set.project(0, &[1.0, 2.0]).is_err());
    }
}

//! Symmetric nonnegative similarity graphs.

use crate::error::{Error, Result};
use crate::numkernel::{DenseMatrix, SymmetricBuilder, SymmetricSparseMatrix};

/// Symmetric, nonnegative affinity matrix with zero diagonal.
///
/// Only nonzero off-diagonal entries are stored. Affinities produced by the
/// max-symmetrization and by every dense stage lie in `[0, 1]`; the
/// sum-symmetrization can reach 2, which [`AffinityMatrix::is_unit_bounded`]
/// reports.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityMatrix {
    inner: SymmetricSparseMatrix,
}

impl AffinityMatrix {
    pub fn empty(n: usize) -> Self {
        Self {
            inner: SymmetricSparseMatrix::empty(n),
        }
    }

    /// Wraps a sparse matrix after checking the affinity invariants; stored
    /// zeros are dropped.
    pub fn from_sparse(m: &SymmetricSparseMatrix) -> Result<Self> {
        Self::from_triplets(m.size(), m.upper_triplets())
    }

    /// Builds from `(i, j, w)` entries; each unordered pair may appear once,
    /// later duplicates overwrite earlier ones.
    pub fn from_triplets(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut b = SymmetricBuilder::new(n);
        for (i, j, w) in entries {
            if i == j {
                if w != 0.0 {
                    return Err(Error::validation(format!("affinity diagonal ({i}, {i}) must be zero")));
                }
                continue;
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::validation(format!(
                    "affinity ({i}, {j}) = {w} is not a finite nonnegative value"
                )));
            }
            b.set(i, j, w)?;
        }
        Ok(Self::drop_zeros(b.build()))
    }

    /// Builds from a dense symmetric matrix.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(Error::validation("affinity must be square"));
        }
        let mut entries = Vec::new();
        for i in 0..n {
            if m[(i, i)] != 0.0 {
                return Err(Error::validation(format!("affinity diagonal ({i}, {i}) must be zero")));
            }
            for j in (i + 1)..n {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::validation(format!("affinity not symmetric at ({i}, {j})")));
                }
                entries.push((i, j, m[(i, j)]));
            }
        }
        Self::from_triplets(n, entries)
    }

    pub(crate) fn from_trusted(inner: SymmetricSparseMatrix) -> Self {
        debug_assert!(inner
            .upper_triplets()
            .all(|(i, j, w)| i != j && w > 0.0 && w.is_finite()));
        Self { inner }
    }

    fn drop_zeros(m: SymmetricSparseMatrix) -> Self {
        if m.upper_triplets().all(|(_, _, w)| w != 0.0) {
            return Self { inner: m };
        }
        let mut b = SymmetricBuilder::new(m.size());
        for (i, j, w) in m.upper_triplets().filter(|t| t.2 != 0.0) {
            b.set(i, j, w).expect("entries already validated");
        }
        Self { inner: b.build() }
    }

    pub fn size(&self) -> usize {
        self.inner.size()
    }

    /// `w_ij`, zero when absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.value(i, j)
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.inner.neighbors(i)
    }

    /// Nonzero entries with `i < j`.
    pub fn upper_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.inner.upper_triplets()
    }

    /// Number of nonzero entries counting both triangles.
    pub fn nnz(&self) -> usize {
        self.inner.stored_len()
    }

    /// Mean number of nonzeros per row.
    pub fn avg_degree(&self) -> f64 {
        if self.size() == 0 {
            0.0
        } else {
            self.nnz() as f64 / self.size() as f64
        }
    }

    /// Weighted degree of vertex `i`.
    pub fn degree(&self, i: usize) -> f64 {
        self.inner.row_sum(i)
    }

    pub fn is_unit_bounded(&self) -> bool {
        self.upper_triplets().all(|(_, _, w)| w <= 1.0)
    }

    pub fn as_sparse(&self) -> &SymmetricSparseMatrix {
        &self.inner
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.inner.to_dense()
    }

    /// True when every entry of `self` is at least the matching entry of `other`.
    pub fn dominates(&self, other: &AffinityMatrix) -> bool {
        self.size() == other.size() && other.upper_triplets().all(|(i, j, w)| self.get(i, j) >= w)
    }

    pub(crate) fn require_unit_bounded(&self, what: &str) -> Result<()> {
        if let Some((i, j, w)) = self.upper_triplets().find(|t| t.2 > 1.0) {
            return Err(Error::validation(format!(
                "{what} needs affinities in [0, 1]; found w({i}, {j}) = {w}"
            )));
        }
        Ok(())
    }
}

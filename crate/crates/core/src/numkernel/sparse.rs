use crate::error::{Error, Result};

use super::DenseMatrix;

/// Symmetric sparse matrix stored as a CSR adjacency over both triangles.
///
/// Each unordered pair is recorded once by the builder (canonical `row < col`)
/// and mirrored into both rows at build time, so `get(i, j) == get(j, i)` holds
/// structurally and neighbours of a row can be walked in O(degree). Rows are
/// sorted by column index. Absent entries read as zero through [`value`].
///
/// [`value`]: SymmetricSparseMatrix::value
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricSparseMatrix {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymmetricSparseMatrix {
    /// Matrix with no stored entries.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            offsets: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Stored value at `(i, j)`, if any.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|p| vals[p])
    }

    /// Stored value at `(i, j)`, or zero.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.get(i, j).unwrap_or(0.0)
    }

    /// Column indices and values stored in row `i`, sorted by column.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (c, v) = self.row(i);
        c.iter().copied().zip(v.iter().copied())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Number of stored entries counting both triangles.
    pub fn stored_len(&self) -> usize {
        self.cols.len()
    }

    /// Stored entries with `i <= j`, in row-major order.
    pub fn upper_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&(j, _)| j >= i)
                .map(move |(j, v)| (i, j, v))
        })
    }

    /// Applies `f` to every stored value, keeping the sparsity pattern.
    pub fn map_values(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            n: self.n,
            offsets: self.offsets.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Sum of the stored values in row `i`.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    /// Dense copy with absent entries set to `fill` (diagonal always zero unless stored).
    pub fn to_dense_with(&self, fill: f64) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    m[(i, j)] = fill;
                }
            }
            for (j, v) in self.neighbors(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.to_dense_with(0.0)
    }

    pub(crate) fn from_sorted_parts(n: usize, offsets: Vec<usize>, cols: Vec<usize>, vals: Vec<f64>) -> Self {
        debug_assert_eq!(offsets.len(), n + 1);
        debug_assert_eq!(cols.len(), vals.len());
        Self { n, offsets, cols, vals }
    }
}

/// How repeated writes to the same unordered pair combine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Combine {
    Last,
    Max,
}

/// Single-writer builder for [`SymmetricSparseMatrix`].
#[derive(Clone, Debug)]
pub struct SymmetricBuilder {
    n: usize,
    allow_diagonal: bool,
    entries: Vec<(usize, usize, f64)>,
}

impl SymmetricBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            allow_diagonal: false,
            entries: Vec::new(),
        }
    }

    /// Permits stored entries on the diagonal.
    pub fn allow_diagonal(mut self) -> Self {
        self.allow_diagonal = true;
        self
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Records `value` for the pair `{i, j}`. Later writes to the same pair win
    /// when built with [`build`](Self::build).
    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::validation(format!(
                "index ({i}, {j}) out of range for size {}",
                self.n
            )));
        }
        if i == j && !self.allow_diagonal {
            return Err(Error::validation(format!("diagonal entry ({i}, {i}) not permitted")));
        }
        if !value.is_finite() {
            return Err(Error::validation(format!("non-finite value {value} at ({i}, {j})")));
        }
        self.entries.push((i.min(j), i.max(j), value));
        Ok(())
    }

    /// Last write per pair wins.
    pub fn build(self) -> SymmetricSparseMatrix {
        self.finish(Combine::Last)
    }

    /// Largest write per pair wins.
    pub fn build_max(self) -> SymmetricSparseMatrix {
        self.finish(Combine::Max)
    }

    fn finish(mut self, combine: Combine) -> SymmetricSparseMatrix {
        // stable sort keeps insertion order among duplicates
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut canon: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for (i, j, v) in self.entries {
            match canon.last_mut() {
                Some(last) if last.0 == i && last.1 == j => {
                    last.2 = match combine {
                        Combine::Last => v,
                        Combine::Max => last.2.max(v),
                    };
                }
                _ => canon.push((i, j, v)),
            }
        }

        let n = self.n;
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in &canon {
            counts[i + 1] += 1;
            if i != j {
                counts[j + 1] += 1;
            }
        }
        for r in 0..n {
            counts[r + 1] += counts[r];
        }
        let offsets = counts.clone();
        let total = offsets[n];
        let mut cols = vec![0usize; total];
        let mut vals = vec![0.0; total];
        let mut cursor = counts;
        // canon is sorted by (i, j); pushing (i, j) then (j, i) keeps every row sorted
        // because row j receives its lower-column mirrors in increasing i order before
        // any of its own upper entries appear later in canon.
        for &(i, j, v) in &canon {
            cols[cursor[i]] = j;
            vals[cursor[i]] = v;
            cursor[i] += 1;
            if i != j {
                cols[cursor[j]] = i;
                vals[cursor[j]] = v;
                cursor[j] += 1;
            }
        }
        SymmetricSparseMatrix::from_sorted_parts(n, offsets, cols, vals)
    }
}

//! Normalized-cut spectral clustering.

use serde::{Deserialize, Serialize};

use crate::affinity::AffinityMatrix;
use crate::error::{Error, Result};
use crate::numkernel::{kmeans, symmetric_eigen, DenseMatrix, KMeansOptions, SeededRng};

/// Degree floor applied before `D^{-1/2}` so isolated vertices stay finite.
pub const DEGREE_FLOOR: f64 = 1e-10;

/// A label in `0..n` for each point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    n: usize,
}

impl ClusterAssignment {
    pub fn new(labels: Vec<usize>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("cluster count must be at least 1"));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= n) {
            return Err(Error::validation(format!("label {bad} outside 0..{n}")));
        }
        Ok(Self { labels, n })
    }

    /// Uses `max(label) + 1` as the cluster count.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let n = labels.iter().max().map_or(1, |m| m + 1);
        Self { labels, n }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    pub fn clusters(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of distinct labels actually used.
    pub fn distinct(&self) -> usize {
        let mut seen = vec![false; self.n];
        self.labels.iter().for_each(|&l| seen[l] = true);
        seen.into_iter().filter(|&s| s).count()
    }
}

/// `I - D^{-1/2} W D^{-1/2}` with degrees floored at `eps`.
pub fn normalized_laplacian(w: &AffinityMatrix, eps: f64) -> DenseMatrix {
    let n = w.size();
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / w.degree(i).max(eps).sqrt()).collect();
    let mut l = DenseMatrix::identity(n);
    for (i, j, v) in w.upper_triplets() {
        let x = -v * inv_sqrt[i] * inv_sqrt[j];
        l[(i, j)] = x;
        l[(j, i)] = x;
    }
    l
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectralOptions {
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        let k = KMeansOptions::new(1);
        Self {
            restarts: k.restarts,
            max_iters: k.max_iters,
        }
    }
}

/// Row-normalized embedding on the `n` eigenvectors of the normalized
/// Laplacian with the smallest eigenvalues. Zero rows stay zero.
pub fn spectral_embedding(w: &AffinityMatrix, n: usize) -> Result<DenseMatrix> {
    if n == 0 || n > w.size() {
        return Err(Error::validation(format!("cluster count {n} outside 1..={}", w.size())));
    }
    let lap = normalized_laplacian(w, DEGREE_FLOOR);
    let mut emb = symmetric_eigen(&lap, n)?.vectors;
    for r in 0..emb.rows() {
        let row = emb.row_mut(r);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    Ok(emb)
}

pub fn spectral_clustering(w: &AffinityMatrix, n: usize, rng: &mut SeededRng) -> Result<ClusterAssignment> {
    spectral_clustering_with(w, n, rng, SpectralOptions::default())
}

pub fn spectral_clustering_with(
    w: &AffinityMatrix,
    n: usize,
    rng: &mut SeededRng,
    opts: SpectralOptions,
) -> Result<ClusterAssignment> {
    let emb = spectral_embedding(w, n)?;
    let km = kmeans(
        &emb,
        KMeansOptions {
            k: n,
            restarts: opts.restarts,
            max_iters: opts.max_iters,
        },
        rng,
    )?;
    ClusterAssignment::new(km.labels, n)
}

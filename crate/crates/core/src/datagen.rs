//! Synthetic union-of-subspaces data.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::SeededRng;

/// `N` points in `R^D`, stored column by column, with optional labels.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    dim: usize,
    data: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl DataMatrix {
    /// `columns` holds `count` points of `dim` coordinates each, point-major.
    pub fn from_columns(dim: usize, columns: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("data dimension must be positive"));
        }
        if !columns.len().is_multiple_of(dim) {
            return Err(Error::validation(format!(
                "{} values do not split into points of dimension {dim}",
                columns.len()
            )));
        }
        if let Some(p) = columns.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!("non-finite coordinate in point {}", p / dim)));
        }
        Ok(Self {
            dim,
            data: columns,
            labels: None,
        })
    }

    /// Builds from a list of points.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.as_ref().len());
        let mut data = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::validation(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            data.extend_from_slice(p);
        }
        Self::from_columns(dim, data)
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.count() {
            return Err(Error::validation(format!(
                "{} labels for {} points",
                labels.len(),
                self.count()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Scales every point to unit Euclidean norm. All-zero points are left as is.
    pub fn normalize(&mut self) {
        for p in self.data.chunks_exact_mut(self.dim) {
            let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                p.iter_mut().for_each(|v| *v /= norm);
            }
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        self.points()
            .all(|p| (p.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() <= tol)
    }
}

/// Parameters of a synthetic union of `n` random linear subspaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSpec {
    pub ambient_dim: usize,
    pub sub_dims: Vec<usize>,
    pub points_per: Vec<usize>,
    /// Standard deviation of isotropic ambient noise added before normalization.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SubspaceSpec {
    /// `n` subspaces of equal dimension and size.
    pub fn uniform(n: usize, ambient_dim: usize, sub_dim: usize, points_per: usize, seed: u64) -> Self {
        Self {
            ambient_dim,
            sub_dims: vec![sub_dim; n],
            points_per: vec![points_per; n],
            noise_sigma: 0.0,
            seed,
        }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn subspaces(&self) -> usize {
        self.sub_dims.len()
    }

    pub fn total_points(&self) -> usize {
        self.points_per.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sub_dims.is_empty() {
            return Err(Error::validation("at least one subspace is required"));
        }
        if self.sub_dims.len() != self.points_per.len() {
            return Err(Error::validation(format!(
                "{} subspace dimensions but {} point counts",
                self.sub_dims.len(),
                self.points_per.len()
            )));
        }
        if self.ambient_dim == 0 {
            return Err(Error::validation("ambient dimension must be positive"));
        }
        for (i, &d) in self.sub_dims.iter().enumerate() {
            if d == 0 || d > self.ambient_dim {
                return Err(Error::validation(format!(
                    "subspace {i} dimension {d} outside 1..={}",
                    self.ambient_dim
                )));
            }
        }
        if let Some(i) = self.points_per.iter().position(|&c| c == 0) {
            return Err(Error::validation(format!("subspace {i} has no points")));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::validation(format!("noise sigma {} invalid", self.noise_sigma)));
        }
        Ok(())
    }
}

/// Orthonormal basis (column-major, `dim x rank`) of the span of a Gaussian matrix,
/// via Gram-Schmidt with one re-orthogonalization pass.
fn random_basis(dim: usize, rank: usize, rng: &mut SeededRng) -> Vec<f64> {
    let mut q = vec![0.0; dim * rank];
    let mut c = 0;
    while c < rank {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for _ in 0..2 {
            for prev in 0..c {
                let b = &q[prev * dim..(prev + 1) * dim];
                let dot: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= dot * bi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // a draw that is numerically dependent on the previous columns is redrawn
        if norm > 1e-8 {
            q[c * dim..(c + 1) * dim]
                .iter_mut()
                .zip(&v)
                .for_each(|(dst, x)| *dst = x / norm);
            c += 1;
        }
    }
    q
}

fn sample_subspace(spec: &SubspaceSpec, idx: usize, root: &SeededRng) -> Vec<f64> {
    let dim = spec.ambient_dim;
    let rank = spec.sub_dims[idx];
    let mut rng = root.substream(idx as u64 + 1);
    let basis = random_basis(dim, rank, &mut rng);
    let mut out = Vec::with_capacity(dim * spec.points_per[idx]);
    for _ in 0..spec.points_per[idx] {
        let coef: Vec<f64> = (0..rank).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut x = vec![0.0; dim];
        for (c, a) in coef.iter().enumerate() {
            let b = &basis[c * dim..(c + 1) * dim];
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += a * bi);
        }
        if spec.noise_sigma > 0.0 {
            for xi in &mut x {
                let e: f64 = StandardNormal.sample(&mut rng);
                *xi += spec.noise_sigma * e;
            }
        }
        out.extend(x);
    }
    out
}

/// Draws points from `n` random subspaces: a Haar-random orthonormal basis per
/// subspace, Gaussian coefficients, optional isotropic noise, then unit-norm
/// scaling. Subspace `i` uses its own seed-derived stream, so the output does
/// not depend on scheduling.
pub fn generate(spec: &SubspaceSpec) -> Result<DataMatrix> {
    spec.validate()?;
    let root = SeededRng::new(spec.seed);
    let blocks: Vec<Vec<f64>> = (0..spec.subspaces())
        .into_par_iter()
        .map(|i| sample_subspace(spec, i, &root))
        .collect();

    let labels = spec
        .points_per
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i, c))
        .collect();
    let data = DataMatrix::from_columns(spec.ambient_dim, blocks.concat())?;
    data.normalized().with_labels(labels)
}

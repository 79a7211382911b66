use rand::Rng;

use crate::error::{Error, Result};

use super::{DenseMatrix, SeededRng};

/// Lloyd k-means with k-means++ seeding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KMeansOptions {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
}

impl KMeansOptions {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            restarts: 20,
            max_iters: 300,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: DenseMatrix,
    /// Within-cluster sum of squares of `labels` around `centroids`.
    pub inertia: f64,
    /// Objective after every assignment step of the winning restart.
    pub history: Vec<f64>,
}

/// Clusters the rows of `points` into `opts.k` groups. The restart with the
/// lowest within-cluster sum of squares wins; the first one on ties.
pub fn kmeans(points: &DenseMatrix, opts: KMeansOptions, rng: &mut SeededRng) -> Result<KMeansResult> {
    let m = points.rows();
    if opts.k == 0 {
        return Err(Error::validation("k-means needs k >= 1"));
    }
    if opts.k > m {
        return Err(Error::validation(format!("k-means k = {} exceeds {m} points", opts.k)));
    }
    if points.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("k-means input has non-finite entries"));
    }

    let mut best: Option<KMeansResult> = None;
    for _ in 0..opts.restarts.max(1) {
        let run = lloyd(points, opts, rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn seed_plus_plus(points: &DenseMatrix, k: usize, rng: &mut SeededRng) -> DenseMatrix {
    let m = points.rows();
    let mut centroids = DenseMatrix::zeros(k, points.cols());
    let first = rng.random_range(0..m);
    centroids.row_mut(0).copy_from_slice(points.row(first));
    let mut d2: Vec<f64> = (0..m).map(|i| sq_dist(points.row(i), centroids.row(0))).collect();

    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // round-off can leave target just above the final partial sum
            chosen.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap_or(m - 1))
        } else {
            rng.random_range(0..m)
        };
        centroids.row_mut(c).copy_from_slice(points.row(pick));
        for (i, di) in d2.iter_mut().enumerate() {
            *di = di.min(sq_dist(points.row(i), centroids.row(c)));
        }
    }
    centroids
}

/// Assigns each point to its nearest centroid (lowest index on ties).
fn assign(points: &DenseMatrix, centroids: &DenseMatrix, labels: &mut [usize], dists: &mut [f64]) -> bool {
    let mut changed = false;
    for i in 0..points.rows() {
        let p = points.row(i);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..centroids.rows() {
            let d = sq_dist(p, centroids.row(c));
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        if labels[i] != best {
            labels[i] = best;
            changed = true;
        }
        dists[i] = best_d;
    }
    changed
}

fn lloyd(points: &DenseMatrix, opts: KMeansOptions, rng: &mut SeededRng) -> KMeansResult {
    let (m, dim, k) = (points.rows(), points.cols(), opts.k);
    let mut centroids = seed_plus_plus(points, k, rng);
    let mut labels = vec![usize::MAX; m];
    let mut dists = vec![0.0; m];
    let mut history = Vec::new();

    for iter in 0..opts.max_iters.max(1) {
        let changed = assign(points, &centroids, &mut labels, &mut dists);
        history.push(dists.iter().sum());
        if !changed && iter > 0 {
            break;
        }

        let mut sums = DenseMatrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for i in 0..m {
            counts[labels[i]] += 1;
            for (s, x) in sums.row_mut(labels[i]).iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }
        let mut taken = vec![false; m];
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let inv = 1.0 / count as f64;
                for (dst, s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            } else {
                // empty cluster: move it onto the worst-served point
                let far = (0..m)
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
                taken[far] = true;
                centroids.row_mut(c).copy_from_slice(points.row(far));
            }
        }
    }

    let inertia = (0..m).map(|i| sq_dist(points.row(i), centroids.row(labels[i]))).sum();
    KMeansResult {
        labels,
        centroids,
        inertia,
        history,
    }
}

//! Naive reference implementations used to check the production code.
#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdsc_core::pce::Thresholds;
use sdsc_core::{AffinityMatrix, DataMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit-norm points with uniform entries in [-1, 1].
pub fn random_points(dim: usize, count: usize, seed: u64) -> DataMatrix {
    let mut r = rng(seed);
    let pts: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..dim).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    DataMatrix::from_points(&pts).unwrap().normalized()
}

/// Random symmetric affinity on `n` points: each pair present with
/// probability `density`, values uniform in (0, 1], drawn from a mixture that
/// puts mass above the default thresholds.
pub fn random_affinity(n: usize, density: f64, seed: u64) -> AffinityMatrix {
    let mut r = rng(seed);
    let mut e = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if r.random_bool(density) {
                let w: f64 = match r.random_range(0..3) {
                    0 => r.random_range(0.8..=1.0),
                    1 => r.random_range(0.6..0.8),
                    _ => r.random_range(0.0..0.6),
                };
                if w > 0.0 {
                    e.push((i, j, w));
                }
            }
        }
    }
    AffinityMatrix::from_triplets(n, e).unwrap()
}

pub fn dense(w: &AffinityMatrix) -> Vec<Vec<f64>> {
    let n = w.size();
    (0..n).map(|i| (0..n).map(|j| w.get(i, j)).collect()).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Textbook correlation; `None` for a zero-variance input.
pub fn naive_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(x), mean(y));
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(num / (vx.sqrt() * vy.sqrt()))
}

/// Direct transcription of the greedy pursuit: per point, `gamma` rounds of
/// scanning every unused point for the largest |correlation| with the
/// residual (first index wins ties), storing it, and projecting it out.
/// Returns columns of `(index, value)` in selection order.
pub fn naive_imc(x: &DataMatrix, gamma: usize) -> Vec<Vec<(usize, f64)>> {
    let n = x.count();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let mut psi = x.point(i).to_vec();
        let mut used = vec![false; n];
        used[i] = true;
        let mut col = Vec::new();
        for _ in 0..gamma {
            if psi.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-10 {
                break;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                if let Some(r) = naive_pearson(&psi, x.point(j)) {
                    if best.is_none() || r.abs() > best.unwrap().1 {
                        best = Some((j, r.abs()));
                    }
                }
            }
            let Some((j, c)) = best else { break };
            used[j] = true;
            col.push((j, c));
            let xj = x.point(j);
            let p: f64 = psi.iter().zip(xj).map(|(a, b)| a * b).sum();
            for (a, b) in psi.iter_mut().zip(xj) {
                *a -= p * b;
            }
        }
        col.retain(|e| e.1 != 0.0);
        cols.push(col);
    }
    cols
}

/// Conditions checked one after another, written out from the level
/// definitions.
pub fn naive_tur(wij: f64, wik: f64, wkj: f64, t: &Thresholds) -> f64 {
    let ext = |w: f64| t.theta1 < w && w <= 1.0;
    let strong = |w: f64| t.theta2 < w && w <= t.theta1;
    if ext(wik) && ext(wkj) && !(t.theta1 < wij && wij <= 1.0) {
        return (wik + wkj) / 2.0;
    }
    let mixed = (ext(wik) && strong(wkj)) || (strong(wik) && ext(wkj));
    if mixed && wij <= t.theta2 {
        return wik.min(wkj);
    }
    if strong(wik) && strong(wkj) && wij == 0.0 {
        return wik.max(wkj) / 2.0;
    }
    wij
}

/// Snapshot PCE over all ordered triples.
pub fn naive_pce(w: &[Vec<f64>], t: &Thresholds) -> Vec<Vec<f64>> {
    let n = w.len();
    let mut out = w.to_vec();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                out[i][j] = out[i][j].max(naive_tur(w[i][j], w[i][k], w[k][j], t));
            }
        }
    }
    out
}

/// One snapshot round of `d_ij = min(d_ij, d_ik + d_kj)`.
pub fn naive_relax(d: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = d.len();
    let mut out = d.to_vec();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j] = out[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    out
}

/// Matches under the best injective relabelling, by trying every permutation.
pub fn brute_force_matches(pred: &[usize], truth: &[usize]) -> usize {
    let mut pl: Vec<usize> = pred.to_vec();
    pl.sort_unstable();
    pl.dedup();
    let mut tl: Vec<usize> = truth.to_vec();
    tl.sort_unstable();
    tl.dedup();
    let size = pl.len().max(tl.len());
    let mut perm: Vec<usize> = (0..size).collect();
    let mut best = 0;
    loop {
        let m = pred
            .iter()
            .zip(truth)
            .filter(|(p, t)| {
                let pi = pl.iter().position(|x| x == *p).unwrap();
                tl.get(perm[pi]) == Some(*t)
            })
            .count();
        best = best.max(m);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best
}

fn next_permutation(a: &mut [usize]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Singular values by one-sided Jacobi on the columns of `cols`.
pub fn singular_values(cols: &[Vec<f64>]) -> Vec<f64> {
    let mut a: Vec<Vec<f64>> = cols.to_vec();
    let m = a.len();
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let alpha: f64 = a[p].iter().map(|v| v * v).sum();
                let beta: f64 = a[q].iter().map(|v| v * v).sum();
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..a[p].len() {
                    let (x, y) = (a[p][r], a[q][r]);
                    a[p][r] = c * x - s * y;
                    a[q][r] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = a.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Numerical rank with a relative cutoff.
pub fn rank(cols: &[Vec<f64>], rel: f64) -> usize {
    let sv = singular_values(cols);
    let top = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > rel * top).count()
}

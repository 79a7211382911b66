//! Clustering accuracy under the best label mapping, normalized mutual
//! information, and algebraic connectivity of the affinity graph.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::affinity::AffinityMatrix;
use crate::error::{Error, Result};
use crate::numkernel::symmetric_eigen;
use crate::spectral::{normalized_laplacian, DEGREE_FLOOR};

/// Optimal predicted-to-truth label correspondence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMapping {
    /// `(predicted, truth)` pairs; a predicted label left without a partner
    /// (more predicted than true clusters) maps to `None`.
    pub pairs: Vec<(usize, Option<usize>)>,
    /// Points whose mapped predicted label equals the truth.
    pub matches: usize,
}

impl LabelMapping {
    pub fn map(&self, predicted: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == predicted).and_then(|p| p.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub acc: f64,
    pub nmi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conn: Option<f64>,
    pub mapping: Vec<(usize, Option<usize>)>,
}

fn check_lengths(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::validation(format!(
            "label length mismatch: predicted={}, truth={}",
            pred.len(),
            truth.len()
        )));
    }
    Ok(())
}

/// Distinct values in ascending order and each element's index among them.
fn compact(labels: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut index = BTreeMap::new();
    for &l in labels {
        index.entry(l).or_insert(0usize);
    }
    for (i, v) in index.values_mut().enumerate() {
        *v = i;
    }
    let values = index.keys().copied().collect();
    (values, labels.iter().map(|l| index[l]).collect())
}

/// Minimum-cost perfect assignment on a square matrix. Returns, for every
/// row, its assigned column.
pub fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = i64::MAX / 4;
    // 1-based potentials; column 0 is a virtual start
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        assign[owner[j] - 1] = j - 1;
    }
    assign
}

/// Label mapping that maximizes the number of agreeing points, found by
/// optimal assignment on the confusion matrix (padded square with zeros).
pub fn bestmap(pred: &[usize], truth: &[usize]) -> Result<LabelMapping> {
    check_lengths(pred, truth)?;
    let (pv, pi) = compact(pred);
    let (tv, ti) = compact(truth);
    let size = pv.len().max(tv.len());
    let mut confusion = vec![vec![0i64; size]; size];
    for (&p, &t) in pi.iter().zip(&ti) {
        confusion[p][t] += 1;
    }
    let cost: Vec<Vec<i64>> = confusion.iter().map(|row| row.iter().map(|&c| -c).collect()).collect();
    let assign = hungarian(&cost);
    let mut matches = 0;
    let mut pairs = Vec::with_capacity(pv.len());
    for (p, &label) in pv.iter().enumerate() {
        let t = assign[p];
        matches += confusion[p][t] as usize;
        pairs.push((label, tv.get(t).copied()));
    }
    Ok(LabelMapping { pairs, matches })
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.is_empty() {
        check_lengths(pred, truth)?;
        return Ok(1.0);
    }
    Ok(bestmap(pred, truth)?.matches as f64 / pred.len() as f64)
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `2 I(U; V) / (H(U) + H(V))` with natural logarithms; 1 when both
/// labelings are a single cluster.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    if pred.is_empty() {
        return Ok(1.0);
    }
    let (pv, pi) = compact(pred);
    let (tv, ti) = compact(truth);
    let n = pred.len() as f64;
    let mut joint = vec![vec![0usize; tv.len()]; pv.len()];
    let mut pc = vec![0usize; pv.len()];
    let mut tc = vec![0usize; tv.len()];
    for (&p, &t) in pi.iter().zip(&ti) {
        joint[p][t] += 1;
        pc[p] += 1;
        tc[t] += 1;
    }
    let hu = entropy(&pc, n);
    let hv = entropy(&tc, n);
    if hu + hv == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (p, row) in joint.iter().enumerate() {
        for (t, &c) in row.iter().enumerate() {
            if c > 0 {
                let pxy = c as f64 / n;
                mi += pxy * (pxy * n * n / (pc[p] as f64 * tc[t] as f64)).ln();
            }
        }
    }
    Ok((2.0 * mi / (hu + hv)).clamp(0.0, 1.0))
}

/// Second smallest eigenvalue of the normalized Laplacian.
pub fn connectivity(w: &AffinityMatrix) -> Result<f64> {
    if w.size() < 2 {
        return Err(Error::validation("connectivity needs at least 2 points"));
    }
    let lap = normalized_laplacian(w, DEGREE_FLOOR);
    let eig = symmetric_eigen(&lap, 2)?;
    Ok(eig.values[1].max(0.0))
}

pub fn evaluate(pred: &[usize], truth: &[usize], affinity: Option<&AffinityMatrix>) -> Result<EvaluationReport> {
    let map = bestmap(pred, truth)?;
    let acc = if pred.is_empty() {
        1.0
    } else {
        map.matches as f64 / pred.len() as f64
    };
    Ok(EvaluationReport {
        acc,
        nmi: nmi(pred, truth)?,
        conn: affinity.map(connectivity).transpose()?,
        mapping: map.pairs,
    })
}

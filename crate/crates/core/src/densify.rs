//! Universal dense stage and normalized-cut diagnostics.
//!
//! Similarities are mapped to simulated distances by a strictly decreasing
//! transform, every pair is relaxed once through a single intermediate point
//! (`d*_ij = min(d_ij, min_k d_ik + d_kj)`, reading only the original
//! distances), and the result is mapped back.

use std::collections::HashMap;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affinity::AffinityMatrix;
use crate::error::{Error, Result};
use crate::numkernel::{DenseMatrix, SymmetricBuilder, SymmetricSparseMatrix};
use crate::spectral::ClusterAssignment;

/// Similarity/distance transform pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    /// `d = 1 - w`, `w = 1 - d`
    D1,
    /// `d = 1 - ln w`, `w = exp(1 - d)`
    D2,
    /// `d = 1 / w`, `w = 1 / d`
    D3,
}

impl TransformKind {
    pub const ALL: [TransformKind; 3] = [TransformKind::D1, TransformKind::D2, TransformKind::D3];

    /// Distance of a pair with similarity `w` in `[0, 1]`.
    pub fn forward(self, w: f64) -> f64 {
        match self {
            TransformKind::D1 => 1.0 - w,
            TransformKind::D2 if w == 0.0 => f64::INFINITY,
            TransformKind::D2 => 1.0 - w.ln(),
            TransformKind::D3 if w == 0.0 => f64::INFINITY,
            TransformKind::D3 => 1.0 / w,
        }
    }

    /// Similarity of a pair at distance `d`.
    pub fn backward(self, d: f64) -> f64 {
        if d == f64::INFINITY {
            return 0.0;
        }
        match self {
            TransformKind::D1 => 1.0 - d,
            TransformKind::D2 => (1.0 - d).exp(),
            TransformKind::D3 => 1.0 / d,
        }
    }

    /// Distance assigned to pairs with zero similarity.
    fn background(self) -> f64 {
        self.forward(0.0)
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(TransformKind::D1),
            "d2" => Ok(TransformKind::D2),
            "d3" => Ok(TransformKind::D3),
            other => Err(Error::validation(format!("unknown transform `{other}`"))),
        }
    }
}

/// Symmetric simulated distances with zero diagonal.
///
/// Pairs not stored explicitly sit at the `background` distance, which is
/// `+inf` for the logarithmic and reciprocal transforms and `1` for the
/// linear one.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    stored: SymmetricSparseMatrix,
    background: f64,
}

impl DistanceMatrix {
    /// Builds from a dense matrix; `+inf` entries become background.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(Error::validation("distance matrix must be square"));
        }
        let mut b = SymmetricBuilder::new(n);
        for i in 0..n {
            if m[(i, i)] != 0.0 {
                return Err(Error::validation(format!("distance diagonal ({i}, {i}) must be zero")));
            }
            for j in (i + 1)..n {
                let d = m[(i, j)];
                if d != m[(j, i)] {
                    return Err(Error::validation(format!("distance not symmetric at ({i}, {j})")));
                }
                if d.is_nan() || d < 0.0 {
                    return Err(Error::validation(format!("distance ({i}, {j}) = {d} is negative")));
                }
                if d.is_finite() {
                    b.set(i, j, d)?;
                }
            }
        }
        Ok(Self {
            stored: b.build(),
            background: f64::INFINITY,
        })
    }

    pub fn size(&self) -> usize {
        self.stored.size()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.stored.get(i, j).unwrap_or(self.background)
        }
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    /// Explicitly stored pairs (`i < j`).
    pub fn stored_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.stored.upper_triplets()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.stored.to_dense_with(self.background)
    }

    /// A path through a background leg can never beat a direct edge when the
    /// background is at least every stored distance.
    fn background_dominates(&self) -> bool {
        self.background == f64::INFINITY || self.stored.upper_triplets().all(|(_, _, d)| d <= self.background)
    }
}

/// Entrywise forward map of the off-diagonal similarities.
pub fn to_distance(w: &AffinityMatrix, kind: TransformKind) -> DistanceMatrix {
    DistanceMatrix {
        stored: w.as_sparse().map_values(|v| kind.forward(v)),
        background: kind.background(),
    }
}

/// One round of triangle relaxation through single intermediates.
pub fn relax(dm: &DistanceMatrix) -> DistanceMatrix {
    if dm.background_dominates() {
        relax_sparse(dm)
    } else {
        relax_dense(dm)
    }
}

/// Repeats [`relax`] until no distance changes, i.e. all-pairs shortest paths.
pub fn relax_to_fixpoint(dm: &DistanceMatrix) -> DistanceMatrix {
    let mut cur = dm.clone();
    // each round at least doubles the hop count covered
    for _ in 0..=usize::BITS {
        let next = relax(&cur);
        if next == cur {
            return next;
        }
        cur = next;
    }
    cur
}

fn relax_sparse(dm: &DistanceMatrix) -> DistanceMatrix {
    let n = dm.size();
    let mut by_low: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for k in 0..n {
        let (cols, _) = dm.stored.row(k);
        for (a, &i) in cols.iter().enumerate() {
            for &j in &cols[a + 1..] {
                by_low[i].push((j, k));
            }
        }
    }

    let improved: Vec<Vec<(usize, usize, f64)>> = by_low
        .into_par_iter()
        .enumerate()
        .map(|(i, proposals)| {
            let mut best: HashMap<usize, f64> = HashMap::new();
            for (j, k) in proposals {
                let through = dm.get(i, k) + dm.get(k, j);
                let e = best.entry(j).or_insert_with(|| dm.get(i, j));
                if through < *e {
                    *e = through;
                }
            }
            let mut out: Vec<_> = best
                .into_iter()
                .filter(|&(j, d)| d < dm.get(i, j))
                .map(|(j, d)| (i, j, d))
                .collect();
            out.sort_by_key(|e| e.1);
            out
        })
        .collect();

    let mut b = SymmetricBuilder::new(n);
    for (i, j, d) in dm.stored.upper_triplets() {
        b.set(i, j, d).expect("stored distances are valid");
    }
    for (i, j, d) in improved.into_iter().flatten() {
        b.set(i, j, d).expect("relaxed distances are finite");
    }
    DistanceMatrix {
        stored: b.build(),
        background: dm.background,
    }
}

fn relax_dense(dm: &DistanceMatrix) -> DistanceMatrix {
    let n = dm.size();
    let d = dm.to_dense();
    let rows: Vec<Vec<(usize, usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for j in (i + 1)..n {
                let mut best = d[(i, j)];
                for k in 0..n {
                    if k != i && k != j {
                        best = best.min(d[(i, k)] + d[(k, j)]);
                    }
                }
                if best.is_finite() && (best != dm.background || dm.stored.get(i, j).is_some()) {
                    out.push((i, j, best));
                }
            }
            out
        })
        .collect();
    let mut b = SymmetricBuilder::new(n);
    for (i, j, v) in rows.into_iter().flatten() {
        b.set(i, j, v).expect("finite distance");
    }
    DistanceMatrix {
        stored: b.build(),
        background: dm.background,
    }
}

/// Entrywise backward map; background and `+inf` map to zero similarity.
pub fn to_similarity(dm: &DistanceMatrix, kind: TransformKind) -> Result<AffinityMatrix> {
    let back = kind.backward(dm.background);
    if back != 0.0 {
        return Err(Error::internal(format!(
            "background distance {} does not map to zero similarity under {kind:?}",
            dm.background
        )));
    }
    let mut b = SymmetricBuilder::new(dm.size());
    for (i, j, d) in dm.stored.upper_triplets() {
        let w = kind.backward(d);
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::internal(format!(
                "distance {d} at ({i}, {j}) outside the {kind:?} backward domain"
            )));
        }
        if w > 0.0 {
            b.set(i, j, w)?;
        }
    }
    Ok(AffinityMatrix::from_trusted(b.build()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseOptions {
    /// Only revise pairs that already have nonzero similarity.
    pub sparsity_preserving: bool,
    /// Relax to a fixpoint (all-pairs shortest paths) instead of one round.
    pub full_apsp: bool,
}

/// Distance-relaxation dense stage: `to_similarity(relax(to_distance(w)))`.
pub fn dense_stage(w: &AffinityMatrix, kind: TransformKind, opts: DenseOptions) -> Result<AffinityMatrix> {
    w.require_unit_bounded("the dense stage")?;
    let d = to_distance(w, kind);
    let relaxed = if opts.full_apsp {
        relax_to_fixpoint(&d)
    } else {
        relax(&d)
    };
    let out = to_similarity(&relaxed, kind)?;
    // the round trip through a distance can lose an ulp; never go below the input
    let mut b = SymmetricBuilder::new(w.size());
    for (i, j, v) in w.upper_triplets() {
        b.set(i, j, v)?;
    }
    if !opts.sparsity_preserving {
        for (i, j, v) in out.upper_triplets() {
            b.set(i, j, v)?;
        }
    } else {
        for (i, j, v) in w.upper_triplets() {
            b.set(i, j, out.get(i, j).max(v))?;
        }
    }
    Ok(AffinityMatrix::from_trusted(b.build_max()))
}

/// Normalized-cut diagnostics of an affinity under a fixed partition.
///
/// Sums run over ordered pairs: `cut(A)` adds `w_uv` for `u` in `A` and `v`
/// outside; `vol(A)` adds `w_ut` for `u, t` both in `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NcutReport {
    /// Distinct labels in ascending order; `cut` and `vol` follow this order.
    pub clusters: Vec<usize>,
    pub cut: Vec<f64>,
    pub vol: Vec<f64>,
    /// `sum cut / vol`; `+inf` when some cluster has zero volume.
    pub ncut: f64,
    /// Set when some cluster has zero volume.
    pub zero_volume: bool,
    /// Total intra-cluster similarity.
    pub intra_sum: f64,
    /// Total inter-cluster similarity.
    pub inter_sum: f64,
    /// Number of nonzero inter-cluster entries.
    pub inter_count: usize,
    /// Mean nonzeros per row.
    pub avg_degree: f64,
    /// `(N k^2 - N k) / (N k^2 - tau)` with `tau = 0`; absent when `k = 0`.
    pub predicted_ratio: Option<f64>,
}

impl NcutReport {
    /// Serializes `+inf` as `null`, which JSON cannot represent.
    pub fn ncut_finite(&self) -> Option<f64> {
        self.ncut.is_finite().then_some(self.ncut)
    }
}

/// Predicted `Ncut*/Ncut` ratio for average degree `k` with no duplicate entries.
pub fn predicted_ratio(k: f64) -> Option<f64> {
    let denom = k * k;
    (denom > 0.0).then(|| (denom - k) / denom)
}

pub fn ncut_report(w: &AffinityMatrix, labels: &ClusterAssignment) -> Result<NcutReport> {
    let n = w.size();
    if labels.len() != n {
        return Err(Error::validation(format!(
            "{} labels for an affinity of size {n}",
            labels.len()
        )));
    }
    let mut clusters: Vec<usize> = labels.labels().to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    let slot: HashMap<usize, usize> = clusters.iter().enumerate().map(|(s, &l)| (l, s)).collect();

    let mut cut = vec![0.0; clusters.len()];
    let mut vol = vec![0.0; clusters.len()];
    let mut inter_count = 0;
    for u in 0..n {
        let su = slot[&labels.labels()[u]];
        for (v, wv) in w.neighbors(u) {
            if labels.labels()[v] == labels.labels()[u] {
                vol[su] += wv;
            } else {
                cut[su] += wv;
                inter_count += 1;
            }
        }
    }
    let zero_volume = vol.contains(&0.0);
    let ncut = if zero_volume {
        f64::INFINITY
    } else {
        cut.iter().zip(&vol).map(|(c, v)| c / v).sum()
    };
    let avg_degree = w.avg_degree();
    Ok(NcutReport {
        intra_sum: vol.iter().sum(),
        inter_sum: cut.iter().sum(),
        clusters,
        cut,
        vol,
        ncut,
        zero_volume,
        inter_count,
        avg_degree,
        predicted_ratio: predicted_ratio(avg_degree),
    })
}

/// `Ncut(w_star) / Ncut(w)` under `labels`; `None` when the baseline Ncut is
/// zero or infinite.
pub fn ncut_gain(w: &AffinityMatrix, w_star: &AffinityMatrix, labels: &ClusterAssignment) -> Result<Option<f64>> {
    if w.size() != w_star.size() {
        return Err(Error::validation("affinities differ in size"));
    }
    let base = ncut_report(w, labels)?.ncut;
    let dense = ncut_report(w_star, labels)?.ncut;
    if base == 0.0 || !base.is_finite() {
        return Ok(None);
    }
    Ok(Some(dense / base))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aff(n: usize, e: &[(usize, usize, f64)]) -> AffinityMatrix {
        AffinityMatrix::from_triplets(n, e.iter().copied()).unwrap()
    }

    #[test]
    fn transform_examples() {
        assert!((TransformKind::D1.forward(0.8) - 0.2).abs() < 1e-15);
        assert_eq!(TransformKind::D2.forward(1.0), 1.0);
        assert!((TransformKind::D3.forward(0.1) - 10.0).abs() < 1e-12);
        assert_eq!(TransformKind::D1.forward(0.0), 1.0);
        assert_eq!(TransformKind::D2.forward(0.0), f64::INFINITY);
        assert_eq!(TransformKind::D3.forward(0.0), f64::INFINITY);

        assert_eq!(TransformKind::D1.backward(0.5), 0.5);
        assert_eq!(TransformKind::D3.backward(4.0), 0.25);
        for k in TransformKind::ALL {
            assert_eq!(k.backward(f64::INFINITY), 0.0);
        }
    }

    #[test]
    fn relax_example() {
        let d = DenseMatrix::from_rows(&[[0.0, 1.0, 0.2], [1.0, 0.0, 0.3], [0.2, 0.3, 0.0]]);
        let r = relax(&DistanceMatrix::from_dense(&d).unwrap());
        assert!((r.get(0, 1) - 0.5).abs() < 1e-15);
        assert_eq!(r.get(0, 2), 0.2);
    }

    #[test]
    fn relax_fixed_point() {
        let d = DenseMatrix::from_rows(&[[0.0, 0.5, 0.4], [0.5, 0.0, 0.3], [0.4, 0.3, 0.0]]);
        let dm = DistanceMatrix::from_dense(&d).unwrap();
        assert_eq!(relax(&dm), dm);
    }

    #[test]
    fn dense_path_used_when_background_small() {
        // stored 5.0 exceeds the background 1.0, so background legs matter
        let mut b = SymmetricBuilder::new(3);
        b.set(0, 1, 5.0).unwrap();
        let dm = DistanceMatrix {
            stored: b.build(),
            background: 1.0,
        };
        let r = relax(&dm);
        assert_eq!(r.get(0, 1), 2.0);
        assert_eq!(r.get(0, 2), 1.0);
    }

    #[test]
    fn fixpoint_reaches_shortest_paths() {
        // path 0-1-2-3 with unit weights under reciprocal distance
        let w = aff(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]);
        let d = to_distance(&w, TransformKind::D3);
        let one = relax(&d);
        assert_eq!(one.get(0, 3), f64::INFINITY);
        assert_eq!(one.get(0, 2), 2.0);
        let all = relax_to_fixpoint(&d);
        assert_eq!(all.get(0, 3), 3.0);
    }

    #[test]
    fn dense_stage_examples() {
        let w = aff(3, &[(0, 2, 0.8), (2, 1, 0.7)]);
        let out = dense_stage(&w, TransformKind::D1, DenseOptions::default()).unwrap();
        assert!((out.get(0, 1) - 0.5).abs() < 1e-12);

        let w = aff(3, &[(0, 1, 0.1), (0, 2, 0.5), (2, 1, 0.5)]);
        let out = dense_stage(&w, TransformKind::D3, DenseOptions::default()).unwrap();
        assert!((out.get(0, 1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sparsity_preserving_option() {
        let w = aff(3, &[(0, 1, 0.1), (0, 2, 0.5), (2, 1, 0.5)]);
        let opts = DenseOptions {
            sparsity_preserving: true,
            ..Default::default()
        };
        let out = dense_stage(&w, TransformKind::D3, opts).unwrap();
        assert!((out.get(0, 1) - 0.25).abs() < 1e-12);

        let w = aff(3, &[(0, 2, 0.8), (2, 1, 0.7)]);
        let out = dense_stage(&w, TransformKind::D1, opts).unwrap();
        assert_eq!(out.get(0, 1), 0.0);
        assert_eq!(out.nnz(), w.nnz());
    }

    #[test]
    fn to_similarity_rejects_out_of_domain() {
        let d = DenseMatrix::from_rows(&[[0.0, 1.5], [1.5, 0.0]]);
        let dm = DistanceMatrix::from_dense(&d).unwrap();
        assert!(matches!(to_similarity(&dm, TransformKind::D1), Err(Error::Internal(_))));
        assert!(to_similarity(&dm, TransformKind::D3).is_ok());
    }

    #[test]
    fn ncut_perfect_blocks() {
        let w = aff(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let labels = ClusterAssignment::new(vec![0, 0, 1, 1], 2).unwrap();
        let r = ncut_report(&w, &labels).unwrap();
        assert_eq!(r.cut, vec![0.0, 0.0]);
        assert_eq!(r.ncut, 0.0);
        assert_eq!(ncut_gain(&w, &w, &labels).unwrap(), None);
    }

    #[test]
    fn ncut_two_by_two_with_bridge() {
        // ordered sums: cut(A1) = w(1,2) = 0.5; vol(A1) = w(0,1) + w(1,0) = 2
        let w = aff(4, &[(0, 1, 1.0), (2, 3, 1.0), (1, 2, 0.5)]);
        let labels = ClusterAssignment::new(vec![0, 0, 1, 1], 2).unwrap();
        let r = ncut_report(&w, &labels).unwrap();
        assert_eq!(r.cut, vec![0.5, 0.5]);
        assert_eq!(r.vol, vec![2.0, 2.0]);
        assert!((r.ncut - 0.5).abs() < 1e-15);
        assert_eq!(r.inter_count, 2);
        assert_eq!(r.intra_sum, 4.0);
        assert_eq!(r.inter_sum, 1.0);
        assert_eq!(ncut_gain(&w, &w, &labels).unwrap(), Some(1.0));
    }

    #[test]
    fn zero_volume_flagged() {
        let w = aff(3, &[(0, 1, 1.0), (1, 2, 0.3)]);
        let labels = ClusterAssignment::new(vec![0, 0, 1], 2).unwrap();
        let r = ncut_report(&w, &labels).unwrap();
        assert!(r.zero_volume);
        assert_eq!(r.ncut, f64::INFINITY);
        assert_eq!(r.ncut_finite(), None);
    }

    #[test]
    fn predicted_ratio_k6() {
        assert!((predicted_ratio(6.0).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(predicted_ratio(0.0), None);
    }
}

//! Piecewise correlation estimation.
//!
//! Similarities are graded into four levels by three thresholds. A triple
//! `(i, j, k)` is ternary unstable when both legs through `k` are strong but
//! the direct similarity `w_ij` is not; such triples raise `w_ij` toward the
//! legs. Every triple reads the original matrix and `w*_ij` is the largest
//! candidate over all intermediates, so the result is independent of the
//! order in which pairs and intermediates are visited.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affinity::AffinityMatrix;
use crate::error::{Error, Result};
use crate::numkernel::SymmetricBuilder;

/// Level boundaries, `0 <= theta3 < theta2 < theta1 <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            theta1: 0.8,
            theta2: 0.6,
            theta3: 0.3,
        }
    }
}

impl Thresholds {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Result<Self> {
        let t = Self { theta1, theta2, theta3 };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { theta1, theta2, theta3 } = *self;
        if !(0.0 <= theta3 && theta3 < theta2 && theta2 < theta1 && theta1 <= 1.0) {
            return Err(Error::validation(format!(
                "thresholds must satisfy 0 <= theta3 < theta2 < theta1 <= 1, got ({theta1}, {theta2}, {theta3})"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrelationLevel {
    /// `(theta1, 1]`
    ExtremelyStrong,
    /// `(theta2, theta1]`
    Strong,
    /// `(theta3, theta2]`
    Medium,
    /// `[0, theta3]`
    Weak,
}

pub fn classify(w: f64, t: &Thresholds) -> Result<CorrelationLevel> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::validation(format!("similarity {w} outside [0, 1]")));
    }
    Ok(if w > t.theta1 {
        CorrelationLevel::ExtremelyStrong
    } else if w > t.theta2 {
        CorrelationLevel::Strong
    } else if w > t.theta3 {
        CorrelationLevel::Medium
    } else {
        CorrelationLevel::Weak
    })
}

/// Which ternary-unstable condition, if any, `(w_ij, w_ik, w_kj)` meets.
/// Conditions are tested in order 1, 2, 3.
pub fn tur_case(w_ij: f64, w_ik: f64, w_kj: f64, t: &Thresholds) -> Option<u8> {
    let extreme = |w: f64| w > t.theta1 && w <= 1.0;
    let strong = |w: f64| w > t.theta2 && w <= t.theta1;
    let (hi, lo) = (w_ik.max(w_kj), w_ik.min(w_kj));

    if extreme(w_ik) && extreme(w_kj) && w_ij <= t.theta1 {
        Some(1)
    } else if extreme(hi) && strong(lo) && w_ij <= t.theta2 {
        Some(2)
    } else if strong(w_ik) && strong(w_kj) && w_ij == 0.0 {
        Some(3)
    } else {
        None
    }
}

/// Revised similarity proposed by intermediate `k`.
pub fn candidate(w_ij: f64, w_ik: f64, w_kj: f64, t: &Thresholds) -> f64 {
    match tur_case(w_ij, w_ik, w_kj, t) {
        Some(1) => 0.5 * (w_ik + w_kj),
        Some(2) => w_ik.min(w_kj),
        Some(3) => 0.5 * w_ik.max(w_kj),
        _ => w_ij,
    }
}

/// Densifies `w` by resolving ternary-unstable triples.
///
/// Every TUR condition needs both legs above `theta2`, so only intermediates
/// `k` adjacent to both `i` and `j` through such strong edges are visited.
pub fn pce_densify(w: &AffinityMatrix, t: &Thresholds) -> Result<AffinityMatrix> {
    t.validate()?;
    w.require_unit_bounded("PCE")?;
    let n = w.size();

    let strong: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|k| w.neighbors(k).filter(|&(_, v)| v > t.theta2).collect())
        .collect();

    // each k proposes values for pairs of its strong neighbours; partition the
    // work by the lower endpoint so that every pair is owned by one task
    let mut by_low: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, legs) in strong.iter().enumerate() {
        for (a, &(i, _)) in legs.iter().enumerate() {
            for &(j, _) in &legs[a + 1..] {
                // legs are sorted by index, so i < j
                by_low[i].push((j, k));
            }
        }
    }

    let updates: Vec<Vec<(usize, usize, f64)>> = by_low
        .into_par_iter()
        .enumerate()
        .map(|(i, proposals)| {
            let mut best: HashMap<usize, f64> = HashMap::new();
            for (j, k) in proposals {
                let w_ij = w.get(i, j);
                let c = candidate(w_ij, w.get(i, k), w.get(k, j), t);
                if c > w_ij {
                    let e = best.entry(j).or_insert(w_ij);
                    *e = e.max(c);
                }
            }
            let mut out: Vec<_> = best.into_iter().map(|(j, v)| (i, j, v)).collect();
            out.sort_by_key(|e| e.1);
            out
        })
        .collect();

    let mut b = SymmetricBuilder::new(n);
    for (i, j, v) in w.upper_triplets() {
        b.set(i, j, v)?;
    }
    for (i, j, v) in updates.into_iter().flatten() {
        b.set(i, j, v)?;
    }
    Ok(AffinityMatrix::from_trusted(b.build_max()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> Thresholds {
        Thresholds::default()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(0.9, &t()).unwrap(), CorrelationLevel::ExtremelyStrong);
        assert_eq!(classify(0.8, &t()).unwrap(), CorrelationLevel::Strong);
        assert_eq!(classify(0.6, &t()).unwrap(), CorrelationLevel::Medium);
        assert_eq!(classify(0.3, &t()).unwrap(), CorrelationLevel::Weak);
        assert_eq!(classify(0.0, &t()).unwrap(), CorrelationLevel::Weak);
        assert_eq!(classify(1.0, &t()).unwrap(), CorrelationLevel::ExtremelyStrong);
        assert!(classify(1.1, &t()).is_err());
        assert!(classify(-0.1, &t()).is_err());
    }

    #[test]
    fn tur_examples() {
        assert_eq!(tur_case(0.5, 0.9, 0.85, &t()), Some(1));
        assert_eq!(tur_case(0.3, 0.9, 0.7, &t()), Some(2));
        assert_eq!(tur_case(0.0, 0.7, 0.65, &t()), Some(3));
        // w_ij already extreme: nothing unstable
        assert_eq!(tur_case(0.85, 0.9, 0.95, &t()), None);
        // condition 2 needs w_ij <= theta2
        assert_eq!(tur_case(0.7, 0.9, 0.7, &t()), None);
        // condition 3 needs w_ij exactly zero
        assert_eq!(tur_case(0.1, 0.7, 0.65, &t()), None);
        // weak leg
        assert_eq!(tur_case(0.0, 0.9, 0.5, &t()), None);
        // both extreme beats case 2 ordering
        assert_eq!(tur_case(0.0, 0.95, 0.81, &t()), Some(1));
    }

    #[test]
    fn threshold_validation() {
        assert!(Thresholds::new(0.6, 0.8, 0.3).is_err());
        assert!(Thresholds::new(0.8, 0.6, 0.6).is_err());
        assert!(Thresholds::new(1.2, 0.6, 0.3).is_err());
        assert!(Thresholds::new(0.8, 0.6, -0.1).is_err());
        assert!(Thresholds::new(1.0, 0.6, 0.0).is_ok());
        let w = AffinityMatrix::empty(3);
        let bad = Thresholds {
            theta1: 0.5,
            theta2: 0.6,
            theta3: 0.1,
        };
        assert!(matches!(pce_densify(&w, &bad), Err(Error::Validation(_))));
    }

    #[test]
    fn case_one_update() {
        let w = AffinityMatrix::from_triplets(3, [(0, 2, 0.9), (2, 1, 0.85), (0, 1, 0.5)]).unwrap();
        let out = pce_densify(&w, &t()).unwrap();
        assert!((out.get(0, 1) - 0.875).abs() < 1e-15);
        assert!((out.get(1, 0) - 0.875).abs() < 1e-15);
        assert_eq!(out.get(0, 2), 0.9);
    }

    #[test]
    fn case_three_creates_edge() {
        let w = AffinityMatrix::from_triplets(3, [(0, 2, 0.7), (2, 1, 0.65)]).unwrap();
        let out = pce_densify(&w, &t()).unwrap();
        assert!((out.get(0, 1) - 0.35).abs() < 1e-15);
        assert_eq!(out.nnz(), 6);
    }

    #[test]
    fn max_over_intermediates() {
        // k=2 gives case 2 (min = 0.7), k=3 gives case 1 (0.925)
        let w = AffinityMatrix::from_triplets(4, [(0, 2, 0.9), (2, 1, 0.7), (0, 3, 0.95), (3, 1, 0.9), (0, 1, 0.2)])
            .unwrap();
        let out = pce_densify(&w, &t()).unwrap();
        assert!((out.get(0, 1) - 0.925).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_without_unstable_triples() {
        let w = AffinityMatrix::from_triplets(4, [(0, 1, 0.9), (1, 2, 0.4), (2, 3, 0.95), (0, 3, 0.1)]).unwrap();
        assert_eq!(pce_densify(&w, &t()).unwrap(), w);
    }

    #[test]
    fn rejects_unbounded_affinity() {
        let w = AffinityMatrix::from_triplets(2, [(0, 1, 1.4)]).unwrap();
        assert!(pce_densify(&w, &t()).is_err());
    }
}

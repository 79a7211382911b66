//! Iterative maximum correlation: greedy sparse self-expression.
//!
//! For every point the residual starts at the point itself. Each iteration
//! picks the not-yet-selected point whose Pearson correlation with the
//! residual has the largest magnitude, stores that magnitude as the
//! coefficient, and removes the residual's projection on the picked point.
//! Points must have unit norm for that removal to be an orthogonal projection.

use rayon::prelude::*;

use crate::affinity::AffinityMatrix;
use crate::datagen::DataMatrix;
use crate::error::{Error, Result};
use crate::numkernel::SymmetricBuilder;

/// A vector whose centered norm falls below this fraction of its norm has no
/// defined correlation.
const DEGENERATE_REL: f64 = 1e-12;

/// A residual at or below this norm (points are unit norm) is exhausted.
const RESIDUAL_FLOOR: f64 = 1e-10;

const NORM_TOL: f64 = 1e-9;

/// Pearson correlation of `x` and `y`, or `None` when either is constant.
///
/// Panics if the lengths differ.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson needs equal-length vectors");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    let nx = x.iter().map(|v| v * v).sum::<f64>();
    let ny = y.iter().map(|v| v * v).sum::<f64>();
    if sxx <= DEGENERATE_REL * DEGENERATE_REL * nx || syy <= DEGENERATE_REL * DEGENERATE_REL * ny {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Centered copy of `v` scaled to unit norm, or `None` when `v` is constant.
fn centered_unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.len();
    if n < 2 {
        return None;
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let ss: f64 = c.iter().map(|x| x * x).sum();
    let raw: f64 = v.iter().map(|x| x * x).sum();
    if ss <= DEGENERATE_REL * DEGENERATE_REL * raw {
        return None;
    }
    let inv = 1.0 / ss.sqrt();
    Some(c.into_iter().map(|x| x * inv).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sparse self-expressive coefficients. Column `i` lists the points chosen
/// to represent point `i`, each with the magnitude of its correlation.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    n: usize,
    budget: usize,
    columns: Vec<Vec<(usize, f64)>>,
    short_columns: usize,
}

impl CoefficientMatrix {
    /// Builds from explicit `(column, row, value)` entries.
    pub fn from_entries(
        n: usize,
        budget: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut columns = vec![Vec::new(); n];
        for (i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::validation(format!(
                    "coefficient ({i}, {j}) out of range for {n}"
                )));
            }
            if i == j {
                return Err(Error::validation(format!(
                    "coefficient diagonal ({i}, {i}) must be zero"
                )));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(format!(
                    "coefficient ({i}, {j}) = {v} outside [0, 1]"
                )));
            }
            let col: &mut Vec<(usize, f64)> = &mut columns[i];
            if col.iter().any(|&(r, _)| r == j) {
                return Err(Error::validation(format!("coefficient ({i}, {j}) given twice")));
            }
            if v != 0.0 {
                col.push((j, v));
            }
        }
        if let Some(i) = columns.iter().position(|c| c.len() > budget) {
            return Err(Error::validation(format!(
                "column {i} has {} nonzeros, budget is {budget}",
                columns[i].len()
            )));
        }
        let short_columns = columns.iter().filter(|c| c.len() < budget).count();
        Ok(Self {
            n,
            budget,
            columns,
            short_columns,
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Nonzero entries of column `i` in selection order.
    pub fn column(&self, i: usize) -> &[(usize, f64)] {
        &self.columns[i]
    }

    /// `c_ij`: the weight of point `j` in the representation of point `i`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.columns[i].iter().find(|&&(r, _)| r == j).map_or(0.0, |&(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Columns that ended with fewer than `budget` nonzeros because no
    /// candidate had a defined correlation with the residual.
    pub fn short_columns(&self) -> usize {
        self.short_columns
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |&(j, v)| (i, j, v)))
    }
}

/// Per-column record of one greedy pursuit.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnTrace {
    /// Chosen indices in order, with the stored `|rho|`.
    pub selected: Vec<(usize, f64)>,
    /// Residual norms: before the first pick, then after each pick.
    pub residual_norms: Vec<f64>,
}

/// Working state of the pursuit for a single point.
struct ResidualState {
    residual: Vec<f64>,
}

impl ResidualState {
    fn new(x: &[f64]) -> Self {
        Self { residual: x.to_vec() }
    }

    fn norm(&self) -> f64 {
        dot(&self.residual, &self.residual).sqrt()
    }

    fn remove_projection(&mut self, atom: &[f64]) {
        let p = dot(&self.residual, atom);
        self.residual.iter_mut().zip(atom).for_each(|(r, a)| *r -= p * a);
    }
}

/// Correlation-ready candidates: each point centered and unit-scaled, stored
/// contiguously; constant points are marked invalid.
struct Candidates {
    dim: usize,
    centered: Vec<f64>,
    valid: Vec<bool>,
}

impl Candidates {
    fn new(x: &DataMatrix) -> Self {
        let dim = x.dim();
        let mut centered = vec![0.0; dim * x.count()];
        let mut valid = vec![false; x.count()];
        for (j, p) in x.points().enumerate() {
            if let Some(c) = centered_unit(p) {
                centered[j * dim..(j + 1) * dim].copy_from_slice(&c);
                valid[j] = true;
            }
        }
        Self { dim, centered, valid }
    }
}

/// Fast scores tie within this relative band are re-ranked by the exact formula.
const TIE_BAND: f64 = 1e-12;

fn pursue(x: &DataMatrix, cands: &Candidates, i: usize, gamma: usize) -> ColumnTrace {
    let mut state = ResidualState::new(x.point(i));
    let mut trace = ColumnTrace {
        selected: Vec::with_capacity(gamma),
        residual_norms: vec![state.norm()],
    };
    let mut taken = vec![false; x.count()];
    taken[i] = true;
    let mut scores: Vec<(usize, f64)> = Vec::with_capacity(x.count());

    for _ in 0..gamma {
        if state.norm() <= RESIDUAL_FLOOR {
            break;
        }
        let Some(psi) = centered_unit(&state.residual) else {
            break;
        };

        // |<psi_c, x_c>| equals |rho| up to rounding
        let mut best = f64::NEG_INFINITY;
        scores.clear();
        for (j, c) in cands.centered.chunks_exact(cands.dim).enumerate() {
            if taken[j] || !cands.valid[j] {
                continue;
            }
            let s = dot(&psi, c).abs();
            best = best.max(s);
            scores.push((j, s));
        }
        if scores.is_empty() {
            break;
        }
        let cutoff = best - TIE_BAND * best.max(1.0);
        let mut pick: Option<(usize, f64)> = None;
        for &(j, s) in &scores {
            if s < cutoff {
                continue;
            }
            let Some(rho) = pearson(&state.residual, x.point(j)) else {
                continue;
            };
            let r = rho.abs();
            if pick.is_none_or(|(_, b)| r > b) {
                pick = Some((j, r));
            }
        }
        let Some((j, r)) = pick else {
            break;
        };

        taken[j] = true;
        trace.selected.push((j, r));
        state.remove_projection(x.point(j));
        trace.residual_norms.push(state.norm());
    }
    trace
}

fn check_inputs(x: &DataMatrix, gamma: usize) -> Result<()> {
    let n = x.count();
    if n < 2 {
        return Err(Error::validation(format!("need at least 2 points, got {n}")));
    }
    if gamma == 0 {
        return Err(Error::validation("iteration budget must be at least 1"));
    }
    if gamma >= n {
        return Err(Error::validation(format!(
            "iteration budget {gamma} must be smaller than the point count {n}"
        )));
    }
    if !x.is_normalized(NORM_TOL) {
        return Err(Error::validation("points must have unit norm"));
    }
    Ok(())
}

/// Greedy pursuit trace for a single point; exposed for inspection and testing.
pub fn imc_column(x: &DataMatrix, i: usize, gamma: usize) -> Result<ColumnTrace> {
    check_inputs(x, gamma)?;
    if i >= x.count() {
        return Err(Error::validation(format!("point {i} out of range")));
    }
    Ok(pursue(x, &Candidates::new(x), i, gamma))
}

/// Sparse coefficient matrix with at most `gamma` nonzeros per column.
/// Columns are computed in parallel; the result does not depend on scheduling.
pub fn imc_coefficients(x: &DataMatrix, gamma: usize) -> Result<CoefficientMatrix> {
    check_inputs(x, gamma)?;
    let cands = Candidates::new(x);
    let columns: Vec<Vec<(usize, f64)>> = (0..x.count())
        .into_par_iter()
        .map(|i| {
            pursue(x, &cands, i, gamma)
                .selected
                .into_iter()
                .filter(|&(_, v)| v != 0.0)
                .collect()
        })
        .collect();
    let short_columns = columns.iter().filter(|c| c.len() < gamma).count();
    Ok(CoefficientMatrix {
        n: x.count(),
        budget: gamma,
        columns,
        short_columns,
    })
}

/// `w_ij = max(|c_ij|, |c_ji|)`.
pub fn affinity_max(c: &CoefficientMatrix) -> AffinityMatrix {
    let mut b = SymmetricBuilder::new(c.size());
    for (i, j, v) in c.entries() {
        b.set(i, j, v.abs()).expect("coefficients are valid");
    }
    AffinityMatrix::from_trusted(b.build_max())
}

/// `w_ij = |c_ij| + |c_ji|`.
pub fn affinity_sum(c: &CoefficientMatrix) -> AffinityMatrix {
    let mut b = SymmetricBuilder::new(c.size());
    for (i, j, v) in c.entries() {
        let w = if i < j {
            v.abs() + c.get(j, i).abs()
        } else if c.get(j, i) == 0.0 {
            v.abs()
        } else {
            // counted from the i < j side
            continue;
        };
        b.set(i, j, w).expect("coefficients are valid");
    }
    AffinityMatrix::from_trusted(b.build())
}

//! End-to-end driver: sparse affinity, optional dense revision, spectral
//! partition, and the experiment helpers built on it.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::affinity::AffinityMatrix;
use crate::datagen::{generate, DataMatrix, SubspaceSpec};
use crate::densify::{dense_stage, ncut_report, DenseOptions, NcutReport, TransformKind};
use crate::error::{Error, Result};
use crate::imc::{affinity_max, affinity_sum, imc_coefficients};
use crate::metrics::{evaluate, EvaluationReport};
use crate::numkernel::SeededRng;
use crate::pce::{pce_densify, Thresholds};
use crate::spectral::{spectral_clustering, ClusterAssignment};

/// Substream reserved for the spectral stage's k-means.
const SPECTRAL_STREAM: u64 = 101;

pub const DEFAULT_MAX_DENSE_N: usize = 10_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SparseMethod {
    #[default]
    Imc,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DenseMethod {
    #[default]
    None,
    Pce,
    D1,
    D2,
    D3,
}

impl DenseMethod {
    pub const ALL: [DenseMethod; 5] = [Self::None, Self::Pce, Self::D1, Self::D2, Self::D3];

    fn transform(self) -> Option<TransformKind> {
        match self {
            Self::D1 => Some(TransformKind::D1),
            Self::D2 => Some(TransformKind::D2),
            Self::D3 => Some(TransformKind::D3),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Pce => "pce",
            Self::D1 => "d1",
            Self::D2 => "d2",
            Self::D3 => "d3",
        }
    }
}

impl fmt::Display for DenseMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DenseMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::validation(format!("unknown dense method `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetrization {
    /// `max(|c_ij|, |c_ji|)`
    #[default]
    Max,
    /// `|c_ij| + |c_ji|`
    Sum,
}

impl FromStr for Symmetrization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max" => Ok(Self::Max),
            "sum" => Ok(Self::Sum),
            _ => Err(Error::validation(format!("unknown symmetrization `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub method: SparseMethod,
    pub gamma: usize,
    pub dense: DenseMethod,
    pub thresholds: Thresholds,
    pub clusters: usize,
    pub seed: u64,
    pub symmetrization: Symmetrization,
    pub sparsity_preserving: bool,
    pub full_apsp: bool,
    pub max_dense_n: usize,
}

impl PipelineConfig {
    pub fn new(gamma: usize, clusters: usize, dense: DenseMethod) -> Self {
        Self {
            method: SparseMethod::Imc,
            gamma,
            dense,
            thresholds: Thresholds::default(),
            clusters,
            seed: 0,
            symmetrization: Symmetrization::Max,
            sparsity_preserving: false,
            full_apsp: false,
            max_dense_n: DEFAULT_MAX_DENSE_N,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.thresholds.validate()?;
        if self.gamma == 0 {
            return Err(Error::validation("gamma must be at least 1"));
        }
        if self.clusters == 0 {
            return Err(Error::validation("cluster count must be at least 1"));
        }
        if self.dense != DenseMethod::None && self.symmetrization == Symmetrization::Sum {
            return Err(Error::validation(
                "sum symmetrization yields similarities above 1; dense stages need max symmetrization",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub sparse: f64,
    pub dense: f64,
    pub spectral: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NcutComparison {
    pub before: NcutReport,
    pub after: NcutReport,
    /// `Ncut(after) / Ncut(before)`; absent when the baseline is zero or infinite.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub points: usize,
    pub timings: StageTimings,
    pub nnz_before: usize,
    pub nnz_after: usize,
    /// Coefficient columns that stopped before spending the full budget.
    pub short_columns: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvaluationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ncut: Option<NcutComparison>,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub labels: ClusterAssignment,
    pub sparse_affinity: AffinityMatrix,
    pub affinity: AffinityMatrix,
    pub report: RunReport,
}

/// Options that change how much the run reports, not what it computes.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReportOptions {
    /// Compute algebraic connectivity of the final affinity (one extra
    /// eigendecomposition).
    pub connectivity: bool,
}

/// Runs the whole pipeline on unit-norm points. `truth` enables evaluation.
pub fn run(x: &DataMatrix, config: &PipelineConfig, truth: Option<&[usize]>) -> Result<PipelineOutput> {
    run_with(x, config, truth, ReportOptions::default())
}

pub fn run_with(
    x: &DataMatrix,
    config: &PipelineConfig,
    truth: Option<&[usize]>,
    opts: ReportOptions,
) -> Result<PipelineOutput> {
    config.validate()?;
    let n = x.count();
    if n > config.max_dense_n {
        return Err(Error::validation(format!(
            "{n} points exceed the dense/spectral cap of {}",
            config.max_dense_n
        )));
    }
    if let Some(t) = truth {
        if t.len() != n {
            return Err(Error::validation(format!("{} truth labels for {n} points", t.len())));
        }
    }
    let start = Instant::now();

    let t0 = Instant::now();
    let coeffs = imc_coefficients(x, config.gamma)?;
    let sparse = match config.symmetrization {
        Symmetrization::Max => affinity_max(&coeffs),
        Symmetrization::Sum => affinity_sum(&coeffs),
    };
    let sparse_secs = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let dense = densify_with(&sparse, config)?;
    let dense_secs = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let mut rng = SeededRng::new(config.seed).substream(SPECTRAL_STREAM);
    let labels = spectral_clustering(&dense, config.clusters, &mut rng)?;
    let spectral_secs = t2.elapsed().as_secs_f64();

    let evaluation = match truth {
        Some(t) => Some(evaluate(labels.labels(), t, opts.connectivity.then_some(&dense))?),
        None => None,
    };
    let ncut = match truth {
        Some(t) if config.dense != DenseMethod::None => {
            let truth_labels = ClusterAssignment::from_labels(t.to_vec());
            let before = ncut_report(&sparse, &truth_labels)?;
            let after = ncut_report(&dense, &truth_labels)?;
            let ratio = (before.ncut > 0.0 && before.ncut.is_finite()).then(|| after.ncut / before.ncut);
            Some(NcutComparison { before, after, ratio })
        }
        _ => None,
    };

    let report = RunReport {
        config: config.clone(),
        points: n,
        timings: StageTimings {
            sparse: sparse_secs,
            dense: dense_secs,
            spectral: spectral_secs,
            total: start.elapsed().as_secs_f64(),
        },
        nnz_before: sparse.nnz(),
        nnz_after: dense.nnz(),
        short_columns: coeffs.short_columns(),
        evaluation,
        ncut,
    };
    Ok(PipelineOutput {
        labels,
        sparse_affinity: sparse,
        affinity: dense,
        report,
    })
}

/// Applies the configured dense stage; `DenseMethod::None` returns a copy.
pub fn densify_with(w: &AffinityMatrix, config: &PipelineConfig) -> Result<AffinityMatrix> {
    match config.dense {
        DenseMethod::None => Ok(w.clone()),
        DenseMethod::Pce => pce_densify(w, &config.thresholds),
        m => dense_stage(
            w,
            m.transform().expect("distance methods carry a transform"),
            DenseOptions {
                sparsity_preserving: config.sparsity_preserving,
                full_apsp: config.full_apsp,
            },
        ),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub points: usize,
    pub imc_seconds: f64,
    /// Dense and spectral seconds, measured only at or below the cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub gamma: usize,
    pub seed: u64,
    pub subspaces: usize,
    pub ambient_dim: usize,
    pub sub_dim: usize,
    /// Also time a PCE dense stage and spectral clustering for sizes at or
    /// below this value (0 disables).
    pub full_pipeline_max_n: usize,
}

impl BenchConfig {
    /// Six 6-dimensional subspaces in 10 dimensions, budget 6.
    pub fn standard(sizes: Vec<usize>, seed: u64) -> Self {
        Self {
            sizes,
            gamma: 6,
            seed,
            subspaces: 6,
            ambient_dim: 10,
            sub_dim: 6,
            full_pipeline_max_n: 0,
        }
    }

    pub fn data_spec(&self, points: usize) -> SubspaceSpec {
        let n = self.subspaces;
        let mut spec = SubspaceSpec::uniform(n, self.ambient_dim, self.sub_dim, points / n, self.seed);
        // spread the remainder so the total is exact
        for c in spec.points_per.iter_mut().take(points % n) {
            *c += 1;
        }
        spec
    }
}

/// Times the sparse stage over increasing sizes; `progress` sees each row.
pub fn bench(config: &BenchConfig, mut progress: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>> {
    if config.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation("bench sizes must be strictly ascending"));
    }
    let mut rows = Vec::with_capacity(config.sizes.len());
    for &points in &config.sizes {
        let x = generate(&config.data_spec(points))?;
        let t0 = Instant::now();
        let c = imc_coefficients(&x, config.gamma)?;
        let imc_seconds = t0.elapsed().as_secs_f64();
        let (mut dense_seconds, mut spectral_seconds) = (None, None);
        if points <= config.full_pipeline_max_n {
            let w = affinity_max(&c);
            let t1 = Instant::now();
            let w = pce_densify(&w, &Thresholds::default())?;
            dense_seconds = Some(t1.elapsed().as_secs_f64());
            let t2 = Instant::now();
            let mut rng = SeededRng::new(config.seed).substream(SPECTRAL_STREAM);
            spectral_clustering(&w, config.subspaces, &mut rng)?;
            spectral_seconds = Some(t2.elapsed().as_secs_f64());
        }
        let row = BenchRow {
            points,
            imc_seconds,
            dense_seconds,
            spectral_seconds,
        };
        progress(&row);
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta1: f64,
    pub theta2: f64,
    pub mean_acc: f64,
    pub mean_nmi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub theta1_values: Vec<f64>,
    pub theta2: f64,
    pub seeds: Vec<u64>,
    pub subspaces: usize,
    pub ambient_dim: usize,
    pub sub_dim: usize,
    pub points_per: usize,
    pub gamma: usize,
}

impl SweepConfig {
    /// `theta1` in `{0.65, 0.70, ..., 0.95}` at `theta2 = 0.6` on five
    /// 3-dimensional subspaces in 30 dimensions.
    pub fn standard(seeds: Vec<u64>) -> Self {
        Self {
            theta1_values: (0..7).map(|s| 0.65 + 0.05 * s as f64).collect(),
            theta2: 0.6,
            seeds,
            subspaces: 5,
            ambient_dim: 30,
            sub_dim: 3,
            points_per: 100,
            gamma: 5,
        }
    }
}

/// Mean ACC and NMI of IMC+PCE for each `theta1`. The sparse affinity of each
/// seed is computed once and shared by every threshold.
pub fn threshold_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.seeds.is_empty() {
        return Err(Error::validation("sweep needs at least one seed"));
    }
    let mut bases = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let spec = SubspaceSpec::uniform(
            config.subspaces,
            config.ambient_dim,
            config.sub_dim,
            config.points_per,
            seed,
        );
        let x = generate(&spec)?;
        let truth = x.labels().expect("generated data is labelled").to_vec();
        let w = affinity_max(&imc_coefficients(&x, config.gamma)?);
        bases.push((seed, w, truth));
    }
    let mut rows = Vec::with_capacity(config.theta1_values.len());
    for &theta1 in &config.theta1_values {
        let t = Thresholds {
            theta1,
            theta2: config.theta2,
            ..Thresholds::default()
        };
        t.validate()?;
        let (mut acc, mut nmi) = (0.0, 0.0);
        for (seed, w, truth) in &bases {
            let dense = pce_densify(w, &t)?;
            let mut rng = SeededRng::new(*seed).substream(SPECTRAL_STREAM);
            let labels = spectral_clustering(&dense, config.subspaces, &mut rng)?;
            let r = evaluate(labels.labels(), truth, None)?;
            acc += r.acc;
            nmi += r.nmi;
        }
        let k = bases.len() as f64;
        rows.push(SweepRow {
            theta1,
            theta2: config.theta2,
            mean_acc: acc / k,
            mean_nmi: nmi / k,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_data(seed: u64) -> DataMatrix {
        generate(&SubspaceSpec::uniform(3, 12, 2, 20, seed)).unwrap()
    }

    #[test]
    fn dense_method_parse() {
        assert_eq!("PCE".parse::<DenseMethod>().unwrap(), DenseMethod::Pce);
        assert_eq!("d3".parse::<DenseMethod>().unwrap(), DenseMethod::D3);
        assert!("d4".parse::<DenseMethod>().is_err());
    }

    #[test]
    fn sum_with_dense_rejected() {
        let mut c = PipelineConfig::new(3, 3, DenseMethod::Pce);
        c.symmetrization = Symmetrization::Sum;
        assert!(matches!(c.validate(), Err(Error::Validation(_))));
        c.dense = DenseMethod::None;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn runs_every_dense_method() {
        let x = small_data(3);
        let truth = x.labels().unwrap().to_vec();
        for m in DenseMethod::ALL {
            let out = run(&x, &PipelineConfig::new(3, 3, m).with_seed(1), Some(&truth)).unwrap();
            let r = &out.report;
            assert_eq!(out.labels.len(), 60);
            assert!(r.nnz_after >= r.nnz_before);
            assert!(out.affinity.dominates(&out.sparse_affinity));
            assert!(r.timings.total >= 0.0);
            assert!(r.evaluation.as_ref().unwrap().acc > 0.5);
            assert_eq!(r.ncut.is_some(), m != DenseMethod::None);
        }
    }

    #[test]
    fn deterministic_labels() {
        let x = small_data(9);
        let c = PipelineConfig::new(3, 3, DenseMethod::D3).with_seed(4);
        let a = run(&x, &c, None).unwrap();
        let b = run(&x, &c, None).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.affinity, b.affinity);
    }

    #[test]
    fn guards() {
        let x = small_data(1);
        let mut c = PipelineConfig::new(60, 3, DenseMethod::None);
        assert!(run(&x, &c, None).is_err());
        c.gamma = 3;
        c.max_dense_n = 59;
        assert!(run(&x, &c, None).is_err());
        c.max_dense_n = 60;
        assert!(run(&x, &c, Some(&[0, 1])).is_err());
    }

    #[test]
    fn connectivity_on_request() {
        let x = small_data(2);
        let truth = x.labels().unwrap().to_vec();
        let c = PipelineConfig::new(3, 3, DenseMethod::None);
        let out = run_with(&x, &c, Some(&truth), ReportOptions { connectivity: true }).unwrap();
        assert!(out.report.evaluation.unwrap().conn.is_some());
    }

    #[test]
    fn bench_rows_and_order() {
        let cfg = BenchConfig::standard(vec![60, 125], 1);
        assert_eq!(cfg.data_spec(125).total_points(), 125);
        let mut seen = 0;
        let rows = bench(&cfg, |_| seen += 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(seen, 2);
        assert!(rows[0].dense_seconds.is_none());
        assert!(bench(&BenchConfig::standard(vec![100, 50], 1), |_| {}).is_err());
    }

    #[test]
    fn sweep_shape() {
        let mut cfg = SweepConfig::standard(vec![1]);
        cfg.points_per = 15;
        cfg.subspaces = 3;
        let rows = threshold_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 7);
        assert!((rows[3].theta1 - 0.8).abs() < 1e-12);
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sdsc_core::io;
use sdsc_core::metrics::evaluate;
use sdsc_core::pce::Thresholds;
use sdsc_core::pipeline::{
    bench, run_with, threshold_sweep, BenchConfig, BenchRow, DenseMethod, PipelineConfig, ReportOptions, SparseMethod,
    SweepConfig, SweepRow, Symmetrization, DEFAULT_MAX_DENSE_N,
};
use sdsc_core::{generate, Error, Result, SubspaceSpec};

/// Sparse-dense subspace clustering.
#[derive(Parser, Debug)]
#[command(name = "sdsc", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate points on a union of random linear subspaces.
    Gen(GenArgs),
    /// Run the clustering pipeline on a data file.
    Cluster(ClusterArgs),
    /// Score predicted labels against ground truth.
    Eval(EvalArgs),
    /// Time the sparse stage over increasing point counts.
    Bench(BenchArgs),
    /// Sweep the extremely-strong threshold of the correlation stage.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    subspaces: usize,
    #[arg(long)]
    ambient_dim: usize,
    #[arg(long)]
    sub_dim: usize,
    #[arg(long)]
    points_per: usize,
    /// Standard deviation of ambient Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Data file (one point per row).
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth labels file.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    /// Keep the points as read instead of scaling them to unit norm.
    #[arg(long)]
    no_normalize: bool,
    #[arg(long, default_value = "imc")]
    method: String,
    /// Nonzeros per coefficient column.
    #[arg(long)]
    gamma: usize,
    /// Dense stage: none, pce, d1, d2 or d3.
    #[arg(long, default_value = "none")]
    dense: String,
    #[arg(long, default_value_t = 0.8)]
    theta1: f64,
    #[arg(long, default_value_t = 0.6)]
    theta2: f64,
    #[arg(long, default_value_t = 0.3)]
    theta3: f64,
    #[arg(long)]
    clusters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coefficient symmetrization: max or sum.
    #[arg(long, default_value = "max")]
    symmetrization: String,
    /// Only revise pairs that already have nonzero similarity.
    #[arg(long)]
    sparsity_preserving: bool,
    /// Relax distances to a fixpoint instead of one round (extension).
    #[arg(long)]
    full_apsp: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_DENSE_N)]
    max_dense_n: usize,
    /// Ground-truth labels; enables accuracy, NMI and Ncut diagnostics.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Also report algebraic connectivity of the final affinity.
    #[arg(long)]
    conn: bool,
    /// Predicted labels file.
    #[arg(long, default_value = "labels.csv")]
    out: PathBuf,
    /// Final affinity as `i,j,w` triplets.
    #[arg(long)]
    affinity_out: Option<PathBuf>,
    /// Run report (JSON); printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Affinity triplets; adds connectivity to the report.
    #[arg(long)]
    affinity: Option<PathBuf>,
    /// Report file (JSON); printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Ascending point counts.
    #[arg(long, value_delimiter = ',', default_value = "2500,5000,10000,20000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 6)]
    gamma: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also time the correlation stage and spectral clustering up to this size.
    #[arg(long, default_value_t = 0)]
    full_max_n: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.65,0.7,0.75,0.8,0.85,0.9,0.95")]
    theta1: Vec<f64>,
    #[arg(long, default_value_t = 0.6)]
    theta2: f64,
    /// Seeds 1..=N.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 100)]
    points_per: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Internal(format!("serializing report: {e}")))
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = to_json(value)? + "\n";
    match path {
        Some(p) => io::write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let spec = SubspaceSpec::uniform(a.subspaces, a.ambient_dim, a.sub_dim, a.points_per, a.seed).with_noise(a.noise);
    let x = generate(&spec)?;
    io::write_data(&a.out, &x)?;
    if let Some(p) = &a.labels {
        io::write_labels(p, x.labels().expect("generated data is labelled"))?;
    }
    println!(
        "{} points, {} subspaces of dimension {} in {} dimensions, noise {}, seed {}",
        x.count(),
        a.subspaces,
        a.sub_dim,
        a.ambient_dim,
        a.noise,
        a.seed
    );
    Ok(())
}

fn cmd_cluster(a: ClusterArgs) -> Result<()> {
    let method = match a.method.to_ascii_lowercase().as_str() {
        "imc" => SparseMethod::Imc,
        other => return Err(Error::Validation(format!("unknown sparse method `{other}`"))),
    };
    let config = PipelineConfig {
        method,
        gamma: a.gamma,
        dense: a.dense.parse::<DenseMethod>()?,
        thresholds: Thresholds::new(a.theta1, a.theta2, a.theta3)?,
        clusters: a.clusters,
        seed: a.seed,
        symmetrization: a.symmetrization.parse::<Symmetrization>()?,
        sparsity_preserving: a.sparsity_preserving,
        full_apsp: a.full_apsp,
        max_dense_n: a.max_dense_n,
    };
    config.validate()?;
    let x = io::read_data(&a.input, !a.no_normalize)?;
    let truth = a.truth.as_deref().map(io::read_labels).transpose()?;
    let out = run_with(&x, &config, truth.as_deref(), ReportOptions { connectivity: a.conn })?;
    io::write_labels(&a.out, out.labels.labels())?;
    if let Some(p) = &a.affinity_out {
        io::write_affinity(p, &out.affinity)?;
    }
    emit_json(&out.report, a.report.as_deref())?;
    if a.report.is_some() {
        let r = &out.report;
        match &r.evaluation {
            Some(e) => println!(
                "{} points, {} clusters, acc {:.4}, nmi {:.4}, {:.2}s",
                r.points, config.clusters, e.acc, e.nmi, r.timings.total
            ),
            None => println!(
                "{} points, {} clusters, {:.2}s",
                r.points, config.clusters, r.timings.total
            ),
        }
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let pred = io::read_labels(&a.pred)?;
    let truth = io::read_labels(&a.truth)?;
    let affinity = a
        .affinity
        .as_deref()
        .map(|p| io::read_affinity(p, pred.len()))
        .transpose()?;
    let report = evaluate(&pred, &truth, affinity.as_ref())?;
    emit_json(&report, a.out.as_deref())
}

#[derive(Serialize)]
struct BenchReport {
    config: BenchConfig,
    threads: usize,
    rows: Vec<BenchRow>,
}

fn opt_secs(v: Option<f64>) -> String {
    v.map(|s| format!("{s:.6}")).unwrap_or_default()
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let mut config = BenchConfig::standard(a.sizes, a.seed);
    config.gamma = a.gamma;
    config.full_pipeline_max_n = a.full_max_n;
    println!("points,imc_seconds,dense_seconds,spectral_seconds");
    let rows = bench(&config, |r| {
        println!(
            "{},{:.6},{},{}",
            r.points,
            r.imc_seconds,
            opt_secs(r.dense_seconds),
            opt_secs(r.spectral_seconds)
        );
    })?;
    if let Some(p) = &a.csv {
        let mut text = String::from("points,imc_seconds,dense_seconds,spectral_seconds\n");
        for r in &rows {
            text += &format!(
                "{},{:.6},{},{}\n",
                r.points,
                r.imc_seconds,
                opt_secs(r.dense_seconds),
                opt_secs(r.spectral_seconds)
            );
        }
        io::write_file(p, &text)?;
    }
    if let Some(p) = &a.json {
        let report = BenchReport {
            config,
            threads: rayon::current_num_threads(),
            rows,
        };
        emit_json(&report, Some(p))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepReport {
    config: SweepConfig,
    rows: Vec<SweepRow>,
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    if a.seeds == 0 {
        return Err(Error::Validation("at least one seed is required".into()));
    }
    let mut config = SweepConfig::standard((1..=a.seeds).collect());
    config.theta1_values = a.theta1;
    config.theta2 = a.theta2;
    config.points_per = a.points_per;
    let rows = threshold_sweep(&config)?;
    let mut text = String::from("theta1,theta2,mean_acc,mean_nmi\n");
    for r in &rows {
        text += &format!("{},{},{:.6},{:.6}\n", r.theta1, r.theta2, r.mean_acc, r.mean_nmi);
    }
    print!("{text}");
    if let Some(p) = &a.csv {
        io::write_file(p, &text)?;
    }
    if let Some(p) = &a.json {
        emit_json(&SweepReport { config, rows }, Some(p))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

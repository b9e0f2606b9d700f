//! `rnhc` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid arguments or unusable input, 2 parse
//! failure (including bad command lines), 3 a partitioning trial failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rnhc::bench::{records_to_csv, run_plan, summaries_to_csv, Method, TrialPlan, TrialSettings};
use rnhc::{
    cut_report, read_hgr, rnhc, spectral_partition, verify_manifest, DatasetManifest, Error, Features, Hypergraph,
    KMeansConfig, OptimizerConfig, Partition, SpectralOptions,
};

#[derive(Parser)]
#[command(name = "rnhc", version, about = "Normalized hypergraph cut partitioning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print size and degree statistics of an .hgr file.
    Info(InfoArgs),
    /// Score an existing assignment file.
    Eval(EvalArgs),
    /// Partition one hypergraph with one method and seed.
    Partition(PartitionArgs),
    /// Run seeded trials over datasets, methods and cluster counts.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InfoArgs {
    path: PathBuf,
    /// Extra manifest rows `name,n,m` that override the built-in table.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EvalArgs {
    path: PathBuf,
    assignment: PathBuf,
    /// Number of clusters; defaults to the largest label plus one.
    #[arg(long)]
    p: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Rnhc,
    Spectral,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Rnhc => Method::Rnhc,
            MethodArg::Spectral => Method::Spectral,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FeaturesArg {
    Raw,
    Normalized,
}

impl From<FeaturesArg> for Features {
    fn from(f: FeaturesArg) -> Features {
        match f {
            FeaturesArg::Raw => Features::Raw,
            FeaturesArg::Normalized => Features::RowNormalized,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Smoothing sharpness of the log-sum-exp span.
    #[arg(long, default_value_t = 100.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Stopping tolerance on the projected gradient norm.
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    /// k-means restarts per trial.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Row treatment before k-means. Defaults to raw rows for rnhc and
    /// unit rows for spectral.
    #[arg(long, value_enum)]
    features: Option<FeaturesArg>,
}

impl SolverArgs {
    fn settings(&self) -> TrialSettings {
        let defaults = TrialSettings::default();
        let mut spectral = SpectralOptions::default();
        let mut rnhc_features = defaults.rnhc_features;
        if let Some(f) = self.features {
            spectral.features = f.into();
            rnhc_features = f.into();
        }
        TrialSettings {
            optimizer: OptimizerConfig {
                alpha: self.alpha,
                max_iters: self.max_iters,
                epsilon: self.eps,
                ..OptimizerConfig::default()
            },
            kmeans_restarts: self.restarts,
            rnhc_features,
            spectral,
        }
    }
}

#[derive(Args)]
struct PartitionArgs {
    path: PathBuf,
    #[arg(long)]
    p: usize,
    #[arg(long, value_enum, default_value = "rnhc")]
    method: MethodArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Assignment file; defaults to `<path>.part.<p>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-iteration optimizer trace as CSV (rnhc only).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(required = true)]
    datasets: Vec<PathBuf>,
    /// Cluster counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8")]
    p: Vec<usize>,
    /// Methods to compare; repeat or comma separate.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "rnhc,spectral")]
    method: Vec<MethodArg>,
    #[arg(long, default_value_t = 40)]
    trials: usize,
    /// Trial i runs with seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run every trial on one thread, as for timing.
    #[arg(long)]
    single_thread: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Per-trial records CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell summary CSV; it is printed to stdout either way.
    #[arg(long)]
    summary: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn input(path: &Path, err: Error) -> Self {
        let code = if is_parse_error(&err) { 2 } else { 1 };
        Failure::new(code, format!("{}: {err}", path.display()))
    }
}

fn is_parse_error(err: &Error) -> bool {
    matches!(
        err,
        Error::Parse { .. }
            | Error::UnsupportedFormat(_)
            | Error::EmptyHypergraph
            | Error::VertexOutOfRange { .. }
            | Error::MissingEdges { .. }
            | Error::LabelOutOfRange { .. }
            | Error::PartitionLength { .. }
    )
}

type CmdResult = Result<(), Failure>;

fn load(path: &Path) -> Result<Hypergraph, Failure> {
    read_hgr(path).map_err(|e| Failure::input(path, e))
}

fn write_file(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values always serialize"));
}

fn info(args: &InfoArgs) -> CmdResult {
    let h = load(&args.path)?;
    let mut manifest = DatasetManifest::ispd98();
    if let Some(m) = &args.manifest {
        manifest = manifest.load_overrides(m).map_err(|e| Failure::input(m, e))?;
    }
    let check = manifest.lookup_path(&args.path).map(|e| verify_manifest(&h, e));

    let degrees = h.degrees();
    let n = h.num_vertices();
    let m = h.num_edges();
    let isolated = degrees.iter().filter(|&&d| d == 0).count();
    let sizes: Vec<usize> = h.edges().map(<[u32]>::len).collect();
    let mean = |total: usize, count: usize| if count == 0 { 0.0 } else { total as f64 / count as f64 };

    let summary = json!({
        "path": args.path.display().to_string(),
        "vertices": n,
        "edges": m,
        "pins": h.num_pins(),
        "dropped_edges": h.dropped_edges(),
        "isolated_vertices": isolated,
        "degree_min": degrees.iter().min().copied().unwrap_or(0),
        "degree_max": degrees.iter().max().copied().unwrap_or(0),
        "degree_mean": mean(h.num_pins(), n),
        "edge_size_min": sizes.iter().min().copied().unwrap_or(0),
        "edge_size_max": h.max_edge_size(),
        "edge_size_mean": mean(h.num_pins(), m),
        "manifest": check.as_ref().map(|c| json!({
            "name": c.name,
            "matches": c.matches,
            "expected_vertices": c.expected_vertices,
            "expected_edges": c.expected_edges,
        })),
    });
    if args.json {
        print_json(&summary);
        return Ok(());
    }
    for (key, value) in summary.as_object().expect("summary is an object") {
        if key != "manifest" {
            println!("{key}: {value}");
        }
    }
    match check {
        Some(c) => println!("manifest: {c}"),
        None => println!("manifest: no entry"),
    }
    Ok(())
}

fn eval(args: &EvalArgs) -> CmdResult {
    let h = load(&args.path)?;
    let text = fs::read_to_string(&args.assignment).map_err(|e| Failure::new(1, format!("{}: {e}", args.assignment.display())))?;
    let part = Partition::parse_assignment(&text, args.p).map_err(|e| Failure::input(&args.assignment, e))?;
    let report = cut_report(&h, &part).map_err(|e| match e {
        Error::PartitionLength { .. } => Failure::input(&args.assignment, e),
        other => Failure::new(1, other.to_string()),
    })?;
    print_json(&serde_json::to_value(&report).expect("reports serialize"));
    Ok(())
}

fn default_assignment_path(path: &Path, p: usize) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(format!(".part.{p}"));
    PathBuf::from(name)
}

fn partition(args: &PartitionArgs) -> CmdResult {
    let h = load(&args.path)?;
    if args.p < 1 || args.p > h.num_vertices() {
        return Err(Failure::new(
            1,
            format!("--p must lie in [1, {}], got {}", h.num_vertices(), args.p),
        ));
    }
    let settings = args.solver.settings();
    let optimizer = OptimizerConfig {
        seed: args.seed,
        ..settings.optimizer.clone()
    };
    optimizer.validate().map_err(|e| Failure::new(1, e.to_string()))?;
    let kmeans = KMeansConfig::new(args.p)
        .with_seed(args.seed)
        .with_restarts(settings.kmeans_restarts);

    let clock = Instant::now();
    let (part, report, trace) = match args.method {
        MethodArg::Rnhc => rnhc(&h, args.p, &optimizer, &kmeans, settings.rnhc_features)
            .map(|out| (out.partition, out.report, out.trace)),
        MethodArg::Spectral => {
            spectral_partition(&h, args.p, &kmeans, &settings.spectral).map(|out| (out.partition, out.report, None))
        }
    }
    .map_err(|e| Failure::new(3, format!("trial failed: {e}")))?;
    let wall_ms = clock.elapsed().as_secs_f64() * 1e3;

    let out = args.out.clone().unwrap_or_else(|| default_assignment_path(&args.path, args.p));
    write_file(&out, &part.to_assignment())?;
    if let (Some(path), Some(t)) = (&args.trace, &trace) {
        write_file(path, &t.to_csv())?;
    }
    print_json(&json!({
        "dataset": rnhc::bench::dataset_name(&args.path),
        "method": Method::from(args.method).name(),
        "p": args.p,
        "seed": args.seed,
        "wall_ms": wall_ms,
        "iterations": trace.as_ref().map_or(0, |t| t.iterations()),
        "termination": trace.as_ref().map(|t| format!("{:?}", t.termination)),
        "assignment": out.display().to_string(),
        "report": report,
    }));
    Ok(())
}

fn bench(args: &BenchArgs) -> CmdResult {
    let mut plan = TrialPlan::new(args.datasets.clone());
    plan.methods = args.method.iter().map(|&m| m.into()).collect();
    plan.methods.dedup();
    plan.p_values = args.p.clone();
    plan.trials = args.trials;
    plan.base_seed = args.seed;
    plan.single_thread = args.single_thread;
    plan.settings = args.solver.settings();
    plan.records_out = args.out.clone();
    plan.summary_out = args.summary.clone();
    plan.validate().map_err(|e| Failure::new(1, e.to_string()))?;
    let run = run_plan(&plan).map_err(|e| Failure::new(if is_parse_error(&e) { 2 } else { 1 }, e.to_string()))?;
    let summary = summaries_to_csv(&run.summaries);
    if let Some(path) = &plan.records_out {
        let text = records_to_csv(&run.records).map_err(|e| Failure::new(1, e.to_string()))?;
        write_file(path, &text)?;
    }
    if let Some(path) = &plan.summary_out {
        write_file(path, &summary)?;
    }
    print!("{summary}");
    let failed = run.records.iter().filter(|r| r.failed).count();
    if failed > 0 {
        log::warn!("{failed} of {} trials failed", run.records.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Info(a) => info(a),
        Command::Eval(a) => eval(a),
        Command::Partition(a) => partition(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

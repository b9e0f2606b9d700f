//! Repeated seeded trials, best-of-R selection and CSV output.
//!
//! Trial `i` of a cell uses seed `base_seed + i` for every method, so the two
//! methods are compared on paired seeds. A trial that ends without a valid
//! `p`-way partition is recorded as failed, carries no scores and is ignored
//! when picking the best value of a cell.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{read_hgr, Hypergraph};
use crate::kmeans::{Features, KMeansConfig};
use crate::metrics::{CutReport, Partition};
use crate::pipeline::rnhc;
use crate::spectral::{spectral_partition, SpectralOptions};
use crate::stiefel::OptimizerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rnhc,
    Spectral,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rnhc => "rnhc",
            Method::Spectral => "spectral",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rnhc" => Ok(Method::Rnhc),
            "spectral" => Ok(Method::Spectral),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// Solver settings shared by every trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSettings {
    pub optimizer: OptimizerConfig,
    pub kmeans_restarts: usize,
    pub rnhc_features: Features,
    pub spectral: SpectralOptions,
}

impl Default for TrialSettings {
    fn default() -> Self {
        TrialSettings {
            optimizer: OptimizerConfig::default(),
            kmeans_restarts: 10,
            rnhc_features: Features::Raw,
            spectral: SpectralOptions::default(),
        }
    }
}

/// `dataset,method,p,seed,nhcut,hcut,approx_nhcut,wall_ms,iters,failed`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub dataset: String,
    pub method: Method,
    pub p: usize,
    pub seed: u64,
    pub nhcut: Option<f64>,
    pub hcut: Option<u64>,
    pub approx_nhcut: Option<f64>,
    pub wall_ms: f64,
    pub iters: usize,
    pub failed: bool,
}

impl BenchRecord {
    /// Same record with the wall-clock column cleared, for reproducibility
    /// comparisons.
    pub fn without_timing(&self) -> BenchRecord {
        BenchRecord {
            wall_ms: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub record: BenchRecord,
    pub partition: Option<Partition>,
    pub report: Option<CutReport>,
    pub error: Option<String>,
}

/// One seeded run of `method` on `h`.
pub fn run_trial(
    h: &Hypergraph,
    dataset: &str,
    method: Method,
    p: usize,
    seed: u64,
    settings: &TrialSettings,
) -> TrialOutcome {
    let clock = Instant::now();
    let kmeans = KMeansConfig::new(p)
        .with_seed(seed)
        .with_restarts(settings.kmeans_restarts);
    let result = match method {
        Method::Rnhc => {
            let optimizer = OptimizerConfig {
                seed,
                ..settings.optimizer.clone()
            };
            rnhc(h, p, &optimizer, &kmeans, settings.rnhc_features).map(|out| {
                let iters = out.trace.as_ref().map_or(0, |t| t.iterations());
                (out.partition, out.report, iters)
            })
        }
        Method::Spectral => spectral_partition(h, p, &kmeans, &settings.spectral)
            .map(|out| (out.partition, out.report, 0)),
    };
    let wall_ms = clock.elapsed().as_secs_f64() * 1e3;
    let mut record = BenchRecord {
        dataset: dataset.to_string(),
        method,
        p,
        seed,
        nhcut: None,
        hcut: None,
        approx_nhcut: None,
        wall_ms,
        iters: 0,
        failed: true,
    };
    match result {
        Ok((partition, report, iters)) => {
            record.nhcut = Some(report.nhcut);
            record.hcut = Some(report.hcut);
            record.approx_nhcut = Some(report.approx_nhcut);
            record.iters = iters;
            record.failed = false;
            TrialOutcome {
                record,
                partition: Some(partition),
                report: Some(report),
                error: None,
            }
        }
        Err(e) => {
            log::warn!("{dataset} {} p={p} seed={seed}: {e}", method.name());
            TrialOutcome {
                record,
                partition: None,
                report: None,
                error: Some(e.to_string()),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub datasets: Vec<PathBuf>,
    pub methods: Vec<Method>,
    pub p_values: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    /// Run everything, trials included, on one thread.
    pub single_thread: bool,
    pub settings: TrialSettings,
    pub records_out: Option<PathBuf>,
    pub summary_out: Option<PathBuf>,
}

impl TrialPlan {
    pub fn new(datasets: Vec<PathBuf>) -> Self {
        TrialPlan {
            datasets,
            methods: vec![Method::Rnhc, Method::Spectral],
            p_values: (2..=8).collect(),
            trials: 40,
            base_seed: 0,
            single_thread: false,
            settings: TrialSettings::default(),
            records_out: None,
            summary_out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if let Some(&p) = self.p_values.iter().find(|&&p| p < 2) {
            return Err(Error::InvalidParameter(format!("p values must be >= 2, got {p}")));
        }
        if self.methods.is_empty() || self.p_values.is_empty() || self.datasets.is_empty() {
            return Err(Error::InvalidParameter("plan has no cells".into()));
        }
        self.settings.optimizer.validate()
    }
}

pub fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string()
}

#[derive(Debug, Clone)]
pub struct BenchRun {
    pub records: Vec<BenchRecord>,
    pub summaries: Vec<CellSummary>,
    /// Worker threads available while trials ran.
    pub threads: usize,
}

/// Runs every `(dataset, method, p)` cell of the plan.
pub fn run_plan(plan: &TrialPlan) -> Result<BenchRun> {
    plan.validate()?;
    let mut graphs = Vec::with_capacity(plan.datasets.len());
    for path in &plan.datasets {
        let h = read_hgr(path)?;
        if let Some(&p) = plan.p_values.iter().find(|&&p| p > h.num_vertices()) {
            return Err(Error::InvalidParameter(format!(
                "p = {p} exceeds the {} vertices of {}",
                h.num_vertices(),
                path.display()
            )));
        }
        graphs.push((dataset_name(path), h));
    }
    if plan.single_thread {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| run_cells(plan, &graphs))
    } else {
        run_cells(plan, &graphs)
    }
}

/// Runs the plan on already-loaded hypergraphs.
pub fn run_cells(plan: &TrialPlan, graphs: &[(String, Hypergraph)]) -> Result<BenchRun> {
    let threads = rayon::current_num_threads();
    let mut records = Vec::new();
    for (name, h) in graphs {
        for &method in &plan.methods {
            for &p in &plan.p_values {
                let seeds: Vec<u64> = (0..plan.trials as u64).map(|i| plan.base_seed + i).collect();
                let trial = |&seed: &u64| run_trial(h, name, method, p, seed, &plan.settings).record;
                let cell: Vec<BenchRecord> = if plan.single_thread {
                    seeds.iter().map(trial).collect()
                } else {
                    seeds.par_iter().map(trial).collect()
                };
                records.extend(cell);
            }
        }
    }
    let summaries = summarize(&records);
    Ok(BenchRun {
        records,
        summaries,
        threads,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub dataset: String,
    pub method: Method,
    pub p: usize,
    pub trials: usize,
    pub failures: usize,
    pub best_nhcut: Option<f64>,
    pub best_seed: Option<u64>,
    pub median_nhcut: Option<f64>,
}

impl CellSummary {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }
}

/// Smallest nhcut among successful records; ties go to the smaller seed.
pub fn best_of(records: &[BenchRecord]) -> Option<&BenchRecord> {
    records
        .iter()
        .filter(|r| !r.failed && r.nhcut.is_some())
        .min_by(|a, b| {
            a.nhcut
                .unwrap()
                .total_cmp(&b.nhcut.unwrap())
                .then(a.seed.cmp(&b.seed))
        })
}

/// Groups records by cell, preserving first-seen order.
pub fn summarize(records: &[BenchRecord]) -> Vec<CellSummary> {
    let mut keys: Vec<(String, Method, usize)> = Vec::new();
    for r in records {
        let key = (r.dataset.clone(), r.method, r.p);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(dataset, method, p)| {
            let cell: Vec<BenchRecord> = records
                .iter()
                .filter(|r| r.dataset == dataset && r.method == method && r.p == p)
                .cloned()
                .collect();
            let best = best_of(&cell);
            let mut ok: Vec<f64> = cell.iter().filter_map(|r| r.nhcut).collect();
            ok.sort_by(f64::total_cmp);
            let median = match ok.len() {
                0 => None,
                len if len % 2 == 1 => Some(ok[len / 2]),
                len => Some(0.5 * (ok[len / 2 - 1] + ok[len / 2])),
            };
            CellSummary {
                dataset,
                method,
                p,
                trials: cell.len(),
                failures: cell.iter().filter(|r| r.failed).count(),
                best_nhcut: best.and_then(|r| r.nhcut),
                best_seed: best.map(|r| r.seed),
                median_nhcut: median,
            }
        })
        .collect()
}

pub const RECORD_HEADER: &str = "dataset,method,p,seed,nhcut,hcut,approx_nhcut,wall_ms,iters,failed";
pub const SUMMARY_HEADER: &str = "dataset,method,p,trials,failures,failure_rate,best_nhcut,best_seed,median_nhcut";

pub fn records_to_csv(records: &[BenchRecord]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(RECORD_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn records_from_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != RECORD_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header {:?}", header.join(",")),
        });
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Per-cell summary table; cells without any successful trial show `N/A`.
pub fn summaries_to_csv(summaries: &[CellSummary]) -> String {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "N/A".to_string());
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summaries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.dataset,
            s.method.name(),
            s.p,
            s.trials,
            s.failures,
            s.failure_rate(),
            opt(s.best_nhcut.map(|v| v.to_string())),
            opt(s.best_seed.map(|v| v.to_string())),
            opt(s.median_nhcut.map(|v| v.to_string())),
        );
    }
    out
}

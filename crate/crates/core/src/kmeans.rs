//! Lloyd's k-means with k-means++ seeding, restarts and empty-cluster repair.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Stop once no centroid moves more than this (Euclidean distance).
    pub tolerance: f64,
    /// Empty clusters repaired per restart before the restart is declared
    /// failed.
    pub max_repairs: usize,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        KMeansConfig {
            k,
            max_iters: 300,
            restarts: 10,
            seed: 0,
            tolerance: 1e-10,
            max_repairs: 3,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: DMatrix<f64>,
    pub inertia: f64,
    /// Set when no restart reached `k` non-empty clusters within the repair
    /// budget.
    pub failed: bool,
    /// Restart that produced the result.
    pub restart: usize,
    /// Inertia after each Lloyd assignment of the chosen restart.
    pub history: Vec<f64>,
}

/// How embedding rows are turned into k-means points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Features {
    Raw,
    RowNormalized,
}

impl Features {
    pub fn apply(self, rows: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Features::Raw => rows.clone(),
            Features::RowNormalized => normalize_rows(rows),
        }
    }
}

/// Scales every row to unit Euclidean norm; zero rows are left as they are.
pub fn normalize_rows(points: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = points.clone();
    for mut row in out.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    // splitmix64 step so neighbouring trial seeds give unrelated streams
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(restart as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Rows {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Rows {
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Clusters the rows of `points` into `config.k` groups.
pub fn kmeans(points: &DMatrix<f64>, config: &KMeansConfig) -> Result<KMeansResult> {
    let (n, d) = points.shape();
    let k = config.k;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds the {n} points")));
    }
    if config.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("k-means input"));
    }
    let mut data = Vec::with_capacity(n * d);
    for i in 0..n {
        data.extend(points.row(i).iter());
    }
    let rows = Rows { data, n, d };

    let mut best: Option<(bool, f64, Run, usize)> = None;
    for r in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(config.seed, r));
        let run = lloyd(&rows, k, config, &mut rng);
        let better = match &best {
            None => true,
            Some((failed, inertia, _, _)) if run.failed == *failed => run.inertia < *inertia,
            Some((failed, ..)) => *failed,
        };
        if better {
            best = Some((run.failed, run.inertia, run, r));
        }
    }
    let (failed, inertia, run, restart) = best.expect("at least one restart");
    let centroids = DMatrix::from_row_slice(k, d, &run.centroids);
    Ok(KMeansResult {
        labels: run.labels,
        centroids,
        inertia,
        failed,
        restart,
        history: run.history,
    })
}

struct Run {
    labels: Vec<usize>,
    centroids: Vec<f64>,
    inertia: f64,
    failed: bool,
    history: Vec<f64>,
}

fn plus_plus(rows: &Rows, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (n, d) = (rows.n, rows.d);
    let mut centroids = Vec::with_capacity(k * d);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(rows.row(first));
    let mut closest: Vec<f64> = (0..n).map(|i| dist2(rows.row(i), rows.row(first))).collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in closest.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.extend_from_slice(rows.row(pick));
        let centre = &centroids[c * d..(c + 1) * d];
        for (i, slot) in closest.iter_mut().enumerate() {
            *slot = slot.min(dist2(rows.row(i), centre));
        }
    }
    centroids
}

fn assign(rows: &Rows, centroids: &[f64], k: usize, labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let d = rows.d;
    let mut inertia = 0.0;
    for i in 0..rows.n {
        let point = rows.row(i);
        let (mut best, mut best_d) = (0, f64::INFINITY);
        for c in 0..k {
            let dd = dist2(point, &centroids[c * d..(c + 1) * d]);
            if dd < best_d {
                best = c;
                best_d = dd;
            }
        }
        labels[i] = best;
        dists[i] = best_d;
        inertia += best_d;
    }
    inertia
}

fn lloyd(rows: &Rows, k: usize, config: &KMeansConfig, rng: &mut ChaCha8Rng) -> Run {
    let (n, d) = (rows.n, rows.d);
    let mut centroids = plus_plus(rows, k, rng);
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut inertia = assign(rows, &centroids, k, &mut labels, &mut dists);
    let mut history = vec![inertia];
    let mut repairs = 0;
    let mut failed = false;

    for _ in 0..config.max_iters {
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let c = labels[i];
            counts[c] += 1;
            for (s, x) in sums[c * d..(c + 1) * d].iter_mut().zip(rows.row(i)) {
                *s += x;
            }
        }

        // Empty clusters take the point farthest from its own centroid.
        while let Some(empty) = counts.iter().position(|&c| c == 0) {
            if repairs == config.max_repairs {
                failed = true;
                break;
            }
            repairs += 1;
            let donor = (0..n)
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
            let Some(donor) = donor else {
                failed = true;
                break;
            };
            let from = labels[donor];
            counts[from] -= 1;
            for (s, x) in sums[from * d..(from + 1) * d].iter_mut().zip(rows.row(donor)) {
                *s -= x;
            }
            labels[donor] = empty;
            dists[donor] = 0.0;
            counts[empty] = 1;
            sums[empty * d..(empty + 1) * d].copy_from_slice(rows.row(donor));
        }
        if failed {
            break;
        }

        let mut shift = 0.0f64;
        for c in 0..k {
            let inv = 1.0 / counts[c] as f64;
            let mut moved = 0.0;
            for j in 0..d {
                let updated = sums[c * d + j] * inv;
                moved += (updated - centroids[c * d + j]).powi(2);
                centroids[c * d + j] = updated;
            }
            shift = shift.max(moved.sqrt());
        }
        let previous = labels.clone();
        inertia = assign(rows, &centroids, k, &mut labels, &mut dists);
        history.push(inertia);
        if shift <= config.tolerance || previous == labels {
            break;
        }
    }

    if !failed {
        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        failed = counts.contains(&0);
    }
    Run {
        labels,
        centroids,
        inertia,
        failed,
        history,
    }
}

//! Feasible curvilinear descent on the Stiefel manifold.
//!
//! At a feasible point `X` with Euclidean gradient `G`, the skew-symmetric
//! matrix `A = G Xᵀ − X Gᵀ` generates the Cayley curve
//!
//! ```text
//! Y(τ) = (I + τ/2 A)⁻¹ (I − τ/2 A) X
//! ```
//!
//! which satisfies `Y(0) = X`, `Y(τ)ᵀ Y(τ) = Xᵀ X` for every `τ`, and
//! `Y'(0) = −A X`, the projection of `−G` onto the tangent space. Because
//! `A = U Vᵀ` with `U = [G | X]` and `V = [X | −G]`, the `n × n` inverse
//! collapses to a `2p × 2p` solve:
//!
//! ```text
//! Y(τ) = X − τ U (I + τ/2 Vᵀ U)⁻¹ Vᵀ X
//! ```
//!
//! Each iteration backtracks along `Y(τ)` until the Armijo condition
//! `f(Y(τ)) ≤ f(X) − c₁ τ ‖A X‖²` holds.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::embedding::{orthogonality_drift, Embedding};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::smoothed::{objective, objective_and_gradient};

/// Drift of `XᵀX` from the identity above which the iterate is re-factored.
pub const DRIFT_LIMIT: f64 = 1e-8;

/// Width of the window used by the stalled-objective stop.
const STALL_WINDOW: usize = 10;
const STALL_TOL: f64 = 1e-12;
const TAU_MIN: f64 = 1e-12;
const TAU_MAX: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepRule {
    /// Alternating Barzilai–Borwein steps from the previous iterate pair,
    /// starting from `initial_step`.
    BarzilaiBorwein,
    /// Always start backtracking from `initial_step`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveSolver {
    /// Low-rank solve when `2p < n/2`, dense otherwise.
    Auto,
    LowRank,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub alpha: f64,
    pub max_iters: usize,
    pub epsilon: f64,
    pub backtrack_factor: f64,
    pub sufficient_decrease: f64,
    pub max_backtracks: usize,
    pub initial_step: f64,
    pub step_rule: StepRule,
    pub curve_solver: CurveSolver,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            alpha: 100.0,
            max_iters: 1000,
            epsilon: 1e-9,
            backtrack_factor: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 25,
            initial_step: 1e-2,
            step_rule: StepRule::BarzilaiBorwein,
            curve_solver: CurveSolver::Auto,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad(format!("backtrack factor must lie in (0, 1), got {}", self.backtrack_factor));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return bad(format!(
                "sufficient decrease constant must lie in (0, 1), got {}",
                self.sufficient_decrease
            ));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad(format!("initial step must be positive, got {}", self.initial_step));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// Projected gradient norm fell below `ε · max(1, |f₀|)`.
    Converged,
    /// Relative objective change over the stall window fell below `1e-12`.
    Stalled,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Objective after the step.
    pub f: f64,
    pub tau: f64,
    /// `‖A X‖_F` at the new iterate.
    pub pg_norm: f64,
    pub backtracks: usize,
    pub drift: f64,
    pub reorthonormalized: bool,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub initial_f: f64,
    pub initial_pg_norm: f64,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
}

impl OptimizerTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_f(&self) -> f64 {
        self.records.last().map_or(self.initial_f, |r| r.f)
    }

    pub fn max_drift(&self) -> f64 {
        self.records.iter().map(|r| r.drift).fold(0.0, f64::max)
    }

    /// Number of accepted steps whose objective exceeds its predecessor's.
    pub fn monotonicity_violations(&self) -> usize {
        let mut prev = self.initial_f;
        let mut bad = 0;
        for r in &self.records {
            if r.f > prev {
                bad += 1;
            }
            prev = r.f;
        }
        bad
    }

    /// `iter,f,tau,pg_norm,backtracks,ms`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,f,tau,pg_norm,backtracks,ms\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.iter, r.f, r.tau, r.pg_norm, r.backtracks, r.ms
            ));
        }
        out
    }
}

/// Seeded random point on the Stiefel manifold (Q factor of a Gaussian
/// matrix).
pub fn random_orthonormal(n: usize, p: usize, seed: u64) -> Result<Embedding> {
    if p == 0 || p > n {
        return Err(Error::Dimension(format!("need 1 <= p <= n, got n = {n}, p = {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss: DMatrix<f64> = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
    Ok(Embedding::new_unchecked(orthonormalize(gauss)))
}

/// Thin QR with the sign of each column fixed so `diag(R) > 0`.
pub fn orthonormalize(x: DMatrix<f64>) -> DMatrix<f64> {
    let p = x.ncols();
    let qr = x.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Low-rank factors of the skew-symmetric `A = U Vᵀ`.
#[derive(Debug, Clone)]
pub struct SkewFactors {
    /// `[G | X]`
    pub u: DMatrix<f64>,
    /// `[X | −G]`
    pub v: DMatrix<f64>,
}

impl SkewFactors {
    pub fn new(x: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<Self> {
        if x.shape() != g.shape() {
            return Err(Error::Dimension(format!(
                "embedding is {:?}, gradient is {:?}",
                x.shape(),
                g.shape()
            )));
        }
        let (n, p) = x.shape();
        let mut u = DMatrix::zeros(n, 2 * p);
        let mut v = DMatrix::zeros(n, 2 * p);
        u.columns_mut(0, p).copy_from(g);
        u.columns_mut(p, p).copy_from(x);
        v.columns_mut(0, p).copy_from(x);
        v.columns_mut(p, p).copy_from(&(-g));
        Ok(SkewFactors { u, v })
    }

    /// Dense `A = U Vᵀ`; `O(n²)` memory.
    pub fn dense(&self) -> DMatrix<f64> {
        &self.u * self.v.transpose()
    }
}

/// The Cayley curve through one iterate, with the per-iterate products
/// cached so each trial step costs one `2p × 2p` solve.
///
/// With `U = [G | X]` and `V = [X | −G]` the small matrices are assembled
/// from the three `p × p` products `XᵀG`, `XᵀX` and `GᵀG`:
///
/// ```text
/// VᵀU = [ XᵀG   XᵀX ]      VᵀX = [  XᵀX ]
///       [ −GᵀG −GᵀX ]            [ −GᵀX ]
/// ```
#[derive(Debug, Clone)]
pub struct CayleyCurve<'a> {
    x: &'a DMatrix<f64>,
    g: &'a DMatrix<f64>,
    vt_u: DMatrix<f64>,
    vt_x: DMatrix<f64>,
    dense_a: Option<DMatrix<f64>>,
}

impl<'a> CayleyCurve<'a> {
    pub fn new(x: &'a DMatrix<f64>, g: &'a DMatrix<f64>, solver: CurveSolver) -> Result<Self> {
        if x.shape() != g.shape() {
            return Err(Error::Dimension(format!(
                "embedding is {:?}, gradient is {:?}",
                x.shape(),
                g.shape()
            )));
        }
        let (n, p) = x.shape();
        let dense = match solver {
            CurveSolver::Auto => 4 * p >= n,
            CurveSolver::LowRank => false,
            CurveSolver::Dense => true,
        };
        let xtg = x.tr_mul(g);
        let xtx = x.tr_mul(x);
        let gtg = g.tr_mul(g);
        let mut vt_u = DMatrix::zeros(2 * p, 2 * p);
        vt_u.view_mut((0, 0), (p, p)).copy_from(&xtg);
        vt_u.view_mut((0, p), (p, p)).copy_from(&xtx);
        vt_u.view_mut((p, 0), (p, p)).copy_from(&(-gtg));
        vt_u.view_mut((p, p), (p, p)).copy_from(&(-xtg.transpose()));
        let mut vt_x = DMatrix::zeros(2 * p, p);
        vt_x.view_mut((0, 0), (p, p)).copy_from(&xtx);
        vt_x.view_mut((p, 0), (p, p)).copy_from(&(-xtg.transpose()));
        let dense_a = if dense {
            Some(SkewFactors::new(x, g)?.dense())
        } else {
            None
        };
        Ok(CayleyCurve {
            x,
            g,
            vt_u,
            vt_x,
            dense_a,
        })
    }

    pub fn uses_dense_solve(&self) -> bool {
        self.dense_a.is_some()
    }

    /// `U z` for a `2p × p` block `z`, without forming `U`.
    fn apply_u(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        let p = self.x.ncols();
        self.g * z.rows(0, p) + self.x * z.rows(p, p)
    }

    /// `A X = U (Vᵀ X)`, the negated tangent of the curve at `τ = 0`.
    pub fn tangent(&self) -> DMatrix<f64> {
        self.apply_u(&self.vt_x)
    }

    pub fn point(&self, tau: f64) -> Result<DMatrix<f64>> {
        if tau == 0.0 {
            return Ok(self.x.clone());
        }
        match &self.dense_a {
            Some(a) => cayley_point_dense(self.x, a, tau),
            None => {
                let k = self.vt_u.nrows();
                let system = DMatrix::identity(k, k) + &self.vt_u * (0.5 * tau);
                let z = system
                    .lu()
                    .solve(&self.vt_x)
                    .ok_or(Error::SingularSystem(k))?;
                if z.iter().any(|v| !v.is_finite()) {
                    return Err(Error::SingularSystem(k));
                }
                Ok(self.x - self.apply_u(&z) * tau)
            }
        }
    }
}

/// Curve point via the `2p × 2p` low-rank identity.
pub fn cayley_point(x: &DMatrix<f64>, factors: &SkewFactors, tau: f64) -> Result<DMatrix<f64>> {
    if tau == 0.0 {
        return Ok(x.clone());
    }
    let k = factors.u.ncols();
    let system = DMatrix::identity(k, k) + factors.v.tr_mul(&factors.u) * (0.5 * tau);
    let z = system
        .lu()
        .solve(&factors.v.tr_mul(x))
        .ok_or(Error::SingularSystem(k))?;
    Ok(x - &factors.u * z * tau)
}

/// Curve point by solving the full `n × n` system `(I + τ/2 A) Y = (I − τ/2 A) X`.
pub fn cayley_point_dense(x: &DMatrix<f64>, a: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let half = a * (0.5 * tau);
    let lhs = DMatrix::identity(n, n) + &half;
    let rhs = x - &half * x;
    lhs.lu().solve(&rhs).ok_or(Error::SingularSystem(n))
}

#[derive(Debug, Clone)]
pub struct LineSearchStep {
    pub tau: f64,
    pub point: DMatrix<f64>,
    pub f: f64,
    pub backtracks: usize,
}

/// Armijo backtracking along the Cayley curve starting from `tau0`.
///
/// Returns `None` when `max_backtracks` reductions all fail the
/// sufficient-decrease test.
pub fn line_search(
    h: &Hypergraph,
    curve: &CayleyCurve<'_>,
    f0: f64,
    pg_norm_sq: f64,
    tau0: f64,
    config: &OptimizerConfig,
) -> Result<Option<LineSearchStep>> {
    let mut tau = tau0;
    for backtracks in 0..=config.max_backtracks {
        match curve.point(tau) {
            Ok(point) => {
                let f = objective(h, &point, config.alpha)?;
                if f <= f0 - config.sufficient_decrease * tau * pg_norm_sq {
                    return Ok(Some(LineSearchStep {
                        tau,
                        point,
                        f,
                        backtracks,
                    }));
                }
            }
            Err(Error::SingularSystem(_)) => {}
            Err(e) => return Err(e),
        }
        tau *= config.backtrack_factor;
    }
    Ok(None)
}

fn frobenius_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Minimizes the smoothed span objective over `n × p` orthonormal matrices,
/// starting from `random_orthonormal(n, p, config.seed)`.
pub fn optimize(h: &Hypergraph, p: usize, config: &OptimizerConfig) -> Result<(Embedding, OptimizerTrace)> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("optimize needs p >= 2, got {p}")));
    }
    let start = random_orthonormal(h.num_vertices(), p, config.seed)?;
    optimize_from(h, start, config)
}

/// As [`optimize`], from a caller-supplied starting point.
pub fn optimize_from(
    h: &Hypergraph,
    start: Embedding,
    config: &OptimizerConfig,
) -> Result<(Embedding, OptimizerTrace)> {
    config.validate()?;
    let mut x = start.into_matrix();
    let (mut f, mut g) = objective_and_gradient(h, &x, config.alpha)?;
    let threshold = config.epsilon * f.abs().max(1.0);
    let mut ax = CayleyCurve::new(&x, &g, config.curve_solver)?.tangent();
    let mut pg = ax.norm();
    let mut trace = OptimizerTrace {
        initial_f: f,
        initial_pg_norm: pg,
        records: Vec::new(),
        termination: Termination::MaxIterations,
    };
    if pg <= threshold {
        trace.termination = Termination::Converged;
        return Ok((Embedding::new_unchecked(x), trace));
    }

    let mut history = vec![f];
    let mut tau_prev = config.initial_step;
    // (X_k − X_{k−1}, AX_k − AX_{k−1}) for the Barzilai–Borwein step.
    let mut prev_diff: Option<(DMatrix<f64>, DMatrix<f64>)> = None;

    for iter in 1..=config.max_iters {
        let clock = Instant::now();
        let curve = CayleyCurve::new(&x, &g, config.curve_solver)?;
        let tau0 = match (&prev_diff, config.step_rule) {
            (Some((s, y)), StepRule::BarzilaiBorwein) => {
                let sy = frobenius_dot(s, y).abs();
                let bb = if iter % 2 == 1 {
                    frobenius_dot(s, s) / sy
                } else {
                    sy / frobenius_dot(y, y)
                };
                if bb.is_finite() && bb > 0.0 {
                    bb.clamp(TAU_MIN, TAU_MAX)
                } else {
                    tau_prev
                }
            }
            _ => config.initial_step,
        };

        let step = line_search(h, &curve, f, pg * pg, tau0, config)?;
        let Some(step) = step else {
            trace.termination = Termination::LineSearchFailed;
            trace.records.push(IterationRecord {
                iter,
                f,
                tau: 0.0,
                pg_norm: pg,
                backtracks: config.max_backtracks,
                drift: orthogonality_drift(&x),
                reorthonormalized: false,
                ms: clock.elapsed().as_secs_f64() * 1e3,
            });
            break;
        };
        drop(curve);

        let mut next = step.point;
        let mut drift = orthogonality_drift(&next);
        let reorthonormalized = drift > DRIFT_LIMIT;
        let mut f_next = step.f;
        if reorthonormalized {
            next = orthonormalize(next);
            drift = orthogonality_drift(&next);
        }
        let (f_eval, g_next) = objective_and_gradient(h, &next, config.alpha)?;
        if reorthonormalized {
            f_next = f_eval;
        }
        let ax_next = CayleyCurve::new(&next, &g_next, config.curve_solver)?.tangent();
        let pg_next = ax_next.norm();

        if config.step_rule == StepRule::BarzilaiBorwein {
            prev_diff = Some((&next - &x, &ax_next - &ax));
        }
        tau_prev = step.tau;
        x = next;
        g = g_next;
        ax = ax_next;
        pg = pg_next;
        f = f_next;
        history.push(f);

        trace.records.push(IterationRecord {
            iter,
            f,
            tau: step.tau,
            pg_norm: pg,
            backtracks: step.backtracks,
            drift,
            reorthonormalized,
            ms: clock.elapsed().as_secs_f64() * 1e3,
        });

        if pg <= threshold {
            trace.termination = Termination::Converged;
            break;
        }
        if history.len() > STALL_WINDOW {
            let old = history[history.len() - 1 - STALL_WINDOW];
            if (old - f).abs() <= STALL_TOL * f.abs().max(1.0) {
                trace.termination = Termination::Stalled;
                break;
            }
        }
    }
    Ok((Embedding::new_unchecked(x), trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_start_is_orthonormal_and_seeded() {
        let a = random_orthonormal(5, 2, 7).unwrap();
        assert!(a.drift() <= 1e-12);
        let b = random_orthonormal(5, 2, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_orthonormal(5, 2, 8).unwrap());
        assert!(matches!(random_orthonormal(2, 3, 1), Err(Error::Dimension(_))));
        assert!(random_orthonormal(3, 3, 1).unwrap().drift() <= 1e-12);
    }

    #[test]
    fn skew_factors_reproduce_a() {
        let x = random_orthonormal(6, 2, 1).unwrap().into_matrix();
        let g = DMatrix::from_fn(6, 2, |i, j| (i as f64 - 2.0 * j as f64).sin());
        let f = SkewFactors::new(&x, &g).unwrap();
        let a = f.dense();
        let direct = &g * x.transpose() - &x * g.transpose();
        assert!((&a - direct).amax() < 1e-14);
        assert!((&a + a.transpose()).amax() < 1e-14);
    }

    #[test]
    fn curve_at_zero_is_identity() {
        let x = random_orthonormal(8, 2, 3).unwrap().into_matrix();
        let g = DMatrix::from_fn(8, 2, |i, j| ((i * 3 + j) as f64).cos());
        let f = SkewFactors::new(&x, &g).unwrap();
        assert_eq!(cayley_point(&x, &f, 0.0).unwrap(), x);
        for solver in [CurveSolver::LowRank, CurveSolver::Dense] {
            assert_eq!(CayleyCurve::new(&x, &g, solver).unwrap().point(0.0).unwrap(), x);
        }
    }

    #[test]
    fn config_validation() {
        let ok = OptimizerConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            OptimizerConfig { max_iters: 0, ..ok.clone() },
            OptimizerConfig { epsilon: 0.0, ..ok.clone() },
            OptimizerConfig { backtrack_factor: 1.0, ..ok.clone() },
            OptimizerConfig { alpha: -1.0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn optimize_needs_two_columns() {
        let h = Hypergraph::from_edges(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(optimize(&h, 1, &OptimizerConfig::default()).is_err());
    }

    #[test]
    fn single_iteration_budget() {
        let h = Hypergraph::from_edges(6, vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![0, 5]]).unwrap();
        let cfg = OptimizerConfig {
            max_iters: 1,
            ..Default::default()
        };
        let (_, trace) = optimize(&h, 2, &cfg).unwrap();
        assert_eq!(trace.iterations(), 1);
    }
}

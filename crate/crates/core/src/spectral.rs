//! Clique-expansion spectral clustering baseline.
//!
//! Every hyperedge `e` becomes a clique whose edges weigh `1/|e|`, giving the
//! graph weights
//!
//! ```text
//! W(u, v) = Σ_{e ⊇ {u, v}} 1/|e|        (u ≠ v)
//! ```
//!
//! The rows of the eigenvectors belonging to the `p` smallest eigenvalues of
//! `L = I − D_W^{-1/2} W D_W^{-1/2}` are then clustered with k-means.
//!
//! `W` is never materialized: `W x` is evaluated per hyperedge as
//! `(W x)_u = Σ_{e ∋ u} (Σ_{v ∈ e} x_v − x_u) / |e|`, which costs `O(Σ|e|)`
//! regardless of edge size.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::kmeans::{Features, KMeansConfig};
use crate::lanczos::{largest_eigenpairs, LanczosConfig};
use crate::metrics::{cut_report, CutReport, Partition};
use crate::pipeline::discretize;

/// Above this many vertices the eigenvectors come from Lanczos on the
/// implicit operator instead of a dense decomposition.
pub const DENSE_EIGEN_LIMIT: usize = 1024;

/// Implicit clique expansion of a hypergraph.
#[derive(Debug, Clone)]
pub struct ExpandedGraph<'a> {
    h: &'a Hypergraph,
    degree: Vec<f64>,
    inv_sqrt_degree: Vec<f64>,
    isolated: usize,
}

pub fn clique_expand(h: &Hypergraph) -> ExpandedGraph<'_> {
    let mut degree = vec![0.0; h.num_vertices()];
    for edge in h.edges() {
        let share = (edge.len() - 1) as f64 / edge.len() as f64;
        for &v in edge {
            degree[v as usize] += share;
        }
    }
    // Vertices without neighbours borrow the smallest positive degree for
    // normalization only.
    let floor = degree
        .iter()
        .copied()
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 1.0 };
    let isolated = degree.iter().filter(|&&d| d == 0.0).count();
    let inv_sqrt_degree = degree
        .iter()
        .map(|&d| 1.0 / if d > 0.0 { d } else { floor }.sqrt())
        .collect();
    ExpandedGraph {
        h,
        degree,
        inv_sqrt_degree,
        isolated,
    }
}

impl ExpandedGraph<'_> {
    pub fn num_vertices(&self) -> usize {
        self.h.num_vertices()
    }

    /// Weighted degree `d_W(u) = Σ_{e ∋ u} (|e| − 1)/|e|`.
    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    /// Vertices with zero expanded degree.
    pub fn isolated(&self) -> usize {
        self.isolated
    }

    /// `y = W x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for edge in self.h.edges() {
            let inv = 1.0 / edge.len() as f64;
            let total: f64 = edge.iter().map(|&v| x[v as usize]).sum();
            for &v in edge {
                y[v as usize] += (total - x[v as usize]) * inv;
            }
        }
    }

    /// `y = D^{-1/2} W D^{-1/2} x`.
    pub fn normalized_matvec(&self, x: &[f64], y: &mut [f64], scratch: &mut Vec<f64>) {
        scratch.clear();
        scratch.extend(x.iter().zip(&self.inv_sqrt_degree).map(|(a, s)| a * s));
        self.matvec(scratch, y);
        for (v, s) in y.iter_mut().zip(&self.inv_sqrt_degree) {
            *v *= s;
        }
    }

    /// Dense `W`; `O(n²)` memory.
    pub fn dense_weights(&self) -> DMatrix<f64> {
        let n = self.num_vertices();
        let mut w = DMatrix::zeros(n, n);
        for edge in self.h.edges() {
            let inv = 1.0 / edge.len() as f64;
            for (i, &a) in edge.iter().enumerate() {
                for &b in &edge[i + 1..] {
                    w[(a as usize, b as usize)] += inv;
                    w[(b as usize, a as usize)] += inv;
                }
            }
        }
        w
    }

    /// Dense symmetric normalized Laplacian.
    pub fn dense_laplacian(&self) -> DMatrix<f64> {
        let n = self.num_vertices();
        let w = self.dense_weights();
        DMatrix::from_fn(n, n, |i, j| {
            let off = w[(i, j)] * self.inv_sqrt_degree[i] * self.inv_sqrt_degree[j];
            if i == j {
                1.0 - off
            } else {
                -off
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenSolver {
    /// Dense up to [`DENSE_EIGEN_LIMIT`] vertices, Lanczos above.
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    /// Ascending Laplacian eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// `n × p`, orthonormal columns.
    pub vectors: DMatrix<f64>,
    pub isolated: usize,
    pub converged: bool,
}

/// Eigenvectors of the `p` smallest eigenvalues of the normalized Laplacian.
pub fn smallest_eigenvectors(
    graph: &ExpandedGraph<'_>,
    p: usize,
    solver: EigenSolver,
    seed: u64,
) -> Result<SpectralEmbedding> {
    let n = graph.num_vertices();
    if p == 0 || p > n {
        return Err(Error::Dimension(format!("need 1 <= p <= n, got n = {n}, p = {p}")));
    }
    let dense = match solver {
        EigenSolver::Auto => n <= DENSE_EIGEN_LIMIT,
        EigenSolver::Dense => true,
        EigenSolver::Lanczos => false,
    };
    if dense {
        let eig = SymmetricEigen::new(graph.dense_laplacian());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut vectors = DMatrix::zeros(n, p);
        for (slot, &i) in order[..p].iter().enumerate() {
            vectors.column_mut(slot).copy_from(&eig.eigenvectors.column(i));
        }
        return Ok(SpectralEmbedding {
            eigenvalues: order[..p].iter().map(|&i| eig.eigenvalues[i]).collect(),
            vectors,
            isolated: graph.isolated(),
            converged: true,
        });
    }

    // Largest eigenpairs of I + N are the smallest of L = I − N.
    let config = LanczosConfig {
        seed,
        ..LanczosConfig::for_count(p)
    };
    let mut scratch = Vec::with_capacity(n);
    let res = largest_eigenpairs(n, p, &config, |x, y| {
        graph.normalized_matvec(x, y, &mut scratch);
        for (out, inp) in y.iter_mut().zip(x) {
            *out += inp;
        }
    })?;
    if !res.converged {
        log::warn!(
            "Lanczos stopped before convergence after {} products (residuals {:?})",
            res.matvecs,
            res.residuals
        );
    }
    Ok(SpectralEmbedding {
        eigenvalues: res.values.iter().map(|mu| 2.0 - mu).collect(),
        vectors: res.vectors,
        isolated: graph.isolated(),
        converged: res.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub solver: EigenSolver,
    pub features: Features,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            solver: EigenSolver::Auto,
            features: Features::RowNormalized,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralOutcome {
    pub partition: Partition,
    pub report: CutReport,
    pub eigenvalues: Vec<f64>,
    pub isolated: usize,
    pub converged: bool,
}

/// Clique expansion, Laplacian eigenvectors, k-means; scored with the exact
/// cut metrics. The k-means seed also seeds the Lanczos start vector.
pub fn spectral_partition(
    h: &Hypergraph,
    p: usize,
    kmeans_config: &KMeansConfig,
    options: &SpectralOptions,
) -> Result<SpectralOutcome> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    if p > h.num_vertices() {
        return Err(Error::InvalidParameter(format!(
            "p = {p} exceeds the {} vertices",
            h.num_vertices()
        )));
    }
    if p == 1 {
        let partition = Partition::single(h.num_vertices());
        let report = cut_report(h, &partition)?;
        return Ok(SpectralOutcome {
            partition,
            report,
            eigenvalues: vec![0.0],
            isolated: 0,
            converged: true,
        });
    }
    let graph = clique_expand(h);
    let emb = smallest_eigenvectors(&graph, p, options.solver, kmeans_config.seed)?;
    let features = options.features.apply(&emb.vectors);
    let partition = discretize(h, &features, &KMeansConfig { k: p, ..kmeans_config.clone() })?;
    let report = cut_report(h, &partition)?;
    Ok(SpectralOutcome {
        partition,
        report,
        eigenvalues: emb.eigenvalues,
        isolated: emb.isolated,
        converged: emb.converged,
    })
}

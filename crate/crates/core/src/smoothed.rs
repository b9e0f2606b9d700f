//! Log-sum-exp relaxation of the edge-span matrix and its gradient.
//!
//! For an embedding `X` (`n × p`) the smoothed span of edge `e` in column `c`
//! is
//!
//! ```text
//! Ŝ(c, e) = (1/α) ln Σ_{v ∈ e} exp(α X(v, c))
//! ```
//!
//! a smooth upper bound of `max_{v ∈ e} X(v, c)` that is tight to within
//! `ln|e| / α`. The relaxed objective is `f(X) = Σ_{c,e} Ŝ(c, e)` and its
//! gradient is the accumulated softmax weight
//!
//! ```text
//! G(v, c) = Σ_{e ∋ v} exp(α X(v, c)) / Σ_{u ∈ e} exp(α X(u, c)).
//! ```
//!
//! Everything is evaluated edge by edge over the sparse incidence lists, with
//! the maximum of each `(c, e)` block shifted out before exponentiating, so no
//! exponent argument is ever positive.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

/// Materialized `p × m` smoothed span matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedSpan {
    pub values: DMatrix<f64>,
    pub alpha: f64,
}

fn check(h: &Hypergraph, x: &DMatrix<f64>, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if x.nrows() != h.num_vertices() {
        return Err(Error::Dimension(format!(
            "embedding has {} rows, hypergraph has {} vertices",
            x.nrows(),
            h.num_vertices()
        )));
    }
    if x.ncols() == 0 {
        return Err(Error::Dimension("embedding has no columns".into()));
    }
    Ok(())
}

/// Stable `(1/α) ln Σ exp(α x_v)` over the pins of one edge in one column.
#[inline]
fn edge_lse(column: &[f64], edge: &[u32], alpha: f64) -> f64 {
    let mx = edge
        .iter()
        .map(|&v| column[v as usize])
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = edge
        .iter()
        .map(|&v| (alpha * (column[v as usize] - mx)).exp())
        .sum();
    mx + sum.ln() / alpha
}

pub fn smoothed_span(h: &Hypergraph, x: &DMatrix<f64>, alpha: f64) -> Result<SmoothedSpan> {
    check(h, x, alpha)?;
    let (p, m) = (x.ncols(), h.num_edges());
    let mut values = DMatrix::zeros(p, m);
    for c in 0..p {
        let column = x.column(c);
        let column = column.as_slice();
        for (e, edge) in h.edges().enumerate() {
            values[(c, e)] = edge_lse(column, edge, alpha);
        }
    }
    Ok(SmoothedSpan { values, alpha })
}

/// `f(X) = Σ_{c,e} Ŝ(c, e)`.
pub fn objective(h: &Hypergraph, x: &DMatrix<f64>, alpha: f64) -> Result<f64> {
    check(h, x, alpha)?;
    let p = x.ncols();
    // Row-major copy: the p entries of a vertex are adjacent, so each pin
    // costs one cache line however many columns there are.
    let rows = x.transpose();
    let rows = rows.as_slice();
    let mut mx = vec![0.0; p];
    let mut sum = vec![0.0; p];
    let mut total = 0.0;
    for edge in h.edges() {
        block_max(rows, edge, &mut mx);
        sum.fill(0.0);
        for &v in edge {
            let row = &rows[v as usize * p..(v as usize + 1) * p];
            for c in 0..p {
                sum[c] += (alpha * (row[c] - mx[c])).exp();
            }
        }
        for c in 0..p {
            total += mx[c] + sum[c].ln() / alpha;
        }
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("objective"));
    }
    Ok(total)
}

fn block_max(rows: &[f64], edge: &[u32], mx: &mut [f64]) {
    let p = mx.len();
    mx.fill(f64::NEG_INFINITY);
    for &v in edge {
        let row = &rows[v as usize * p..(v as usize + 1) * p];
        for (m, &r) in mx.iter_mut().zip(row) {
            *m = m.max(r);
        }
    }
}

/// Objective value and Euclidean gradient in one pass over the pins.
pub fn objective_and_gradient(
    h: &Hypergraph,
    x: &DMatrix<f64>,
    alpha: f64,
) -> Result<(f64, DMatrix<f64>)> {
    check(h, x, alpha)?;
    let (n, p) = (x.nrows(), x.ncols());
    let rows = x.transpose();
    let rows = rows.as_slice();
    let mut grad_rows = DMatrix::<f64>::zeros(p, n);
    let grad = grad_rows.as_mut_slice();
    let mut weights = vec![0.0; h.max_edge_size() * p];
    let mut mx = vec![0.0; p];
    let mut sum = vec![0.0; p];
    let mut total = 0.0;
    for edge in h.edges() {
        block_max(rows, edge, &mut mx);
        sum.fill(0.0);
        for (k, &v) in edge.iter().enumerate() {
            let row = &rows[v as usize * p..(v as usize + 1) * p];
            let w = &mut weights[k * p..(k + 1) * p];
            for c in 0..p {
                w[c] = (alpha * (row[c] - mx[c])).exp();
                sum[c] += w[c];
            }
        }
        for c in 0..p {
            total += mx[c] + sum[c].ln() / alpha;
            sum[c] = 1.0 / sum[c];
        }
        for (k, &v) in edge.iter().enumerate() {
            let g = &mut grad[v as usize * p..(v as usize + 1) * p];
            let w = &weights[k * p..(k + 1) * p];
            for c in 0..p {
                g[c] += w[c] * sum[c];
            }
        }
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("objective"));
    }
    Ok((total, grad_rows.transpose()))
}

pub fn gradient(h: &Hypergraph, x: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    objective_and_gradient(h, x, alpha).map(|(_, g)| g)
}

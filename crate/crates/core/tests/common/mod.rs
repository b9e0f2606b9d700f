//! Independent reference implementations shared by the integration tests.
//!
//! Everything here works from plain edge lists and label vectors and never
//! calls into the library's metric or objective code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnhc::Hypergraph;

pub type Q = Ratio<i64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Edge lists with distinct pins, sizes in `2..=max_size.min(n)`.
pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, m: usize, max_size: usize) -> Vec<Vec<usize>> {
    (0..m)
        .map(|_| {
            let size = rng.random_range(2..=max_size.min(n));
            let mut pool: Vec<usize> = (0..n).collect();
            for i in 0..size {
                let j = rng.random_range(i..n);
                pool.swap(i, j);
            }
            let mut e = pool[..size].to_vec();
            e.sort_unstable();
            e
        })
        .collect()
}

pub fn build(n: usize, edges: &[Vec<usize>]) -> Hypergraph {
    Hypergraph::from_edges(n, edges.to_vec()).expect("valid test hypergraph")
}

/// `n` uniform in `2..=n_max`, `m` uniform in `1..=m_max`.
pub fn random_instance(rng: &mut ChaCha8Rng, n_max: usize, m_max: usize) -> (usize, Vec<Vec<usize>>) {
    let n = rng.random_range(2..=n_max);
    let m = rng.random_range(1..=m_max);
    (n, random_edges(rng, n, m, 4))
}

/// Two disjoint groups of ten vertices; each group gets twelve random edges
/// of size 2 to 4, the first few chosen so the group is connected.
pub fn planted_two_components(seed: u64) -> (usize, Vec<Vec<usize>>) {
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for comp in 0..2 {
        let base = comp * 10;
        let mut order: Vec<usize> = (0..10).collect();
        for i in (1..10).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut reached = 1;
        let mut count = 0;
        while reached < 10 {
            let size = rng.random_range(2..=4usize).min(10 - reached + 1);
            let mut e = vec![base + order[rng.random_range(0..reached)]];
            e.extend(order[reached..reached + size - 1].iter().map(|&v| base + v));
            reached += size - 1;
            edges.push(e);
            count += 1;
        }
        for _ in count..12 {
            let size = rng.random_range(2..=4);
            let mut pool: Vec<usize> = (0..10).collect();
            for i in 0..size {
                let j = rng.random_range(i..10);
                pool.swap(i, j);
            }
            edges.push(pool[..size].iter().map(|&v| base + v).collect());
        }
    }
    (20, edges)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactCut {
    pub hcut: i64,
    pub nhcut: Q,
    pub approx_hcut: Q,
    pub approx_nhcut: Q,
    pub volumes: Vec<i64>,
    pub cuts: Vec<i64>,
}

/// Cut quantities straight from the definitions; `None` when some cluster
/// has zero volume.
pub fn exact_cut(n: usize, edges: &[Vec<usize>], labels: &[usize], p: usize) -> Option<ExactCut> {
    assert_eq!(labels.len(), n);
    let mut volumes = vec![0i64; p];
    for e in edges {
        for &v in e {
            volumes[labels[v]] += 1;
        }
    }
    if volumes.contains(&0) {
        return None;
    }
    let mut cuts = vec![0i64; p];
    let mut hcut = 0;
    // Clique weights 1/|e| summed over ordered pairs leaving each cluster.
    let mut leaving = vec![Q::from_integer(0); p];
    for e in edges {
        let touched: BTreeSet<usize> = e.iter().map(|&v| labels[v]).collect();
        let pe = touched.len() as i64;
        hcut += pe * (pe - 1);
        for &c in &touched {
            cuts[c] += pe - 1;
        }
        let w = Q::new(1, e.len() as i64);
        for &u in e {
            for &v in e {
                if labels[u] != labels[v] {
                    leaving[labels[u]] += w;
                }
            }
        }
    }
    let nhcut = (0..p).map(|i| Q::new(cuts[i], volumes[i])).sum();
    let approx_hcut = leaving.iter().copied().sum();
    let approx_nhcut = (0..p).map(|i| leaving[i] / volumes[i]).sum();
    Some(ExactCut {
        hcut,
        nhcut,
        approx_hcut,
        approx_nhcut,
        volumes,
        cuts,
    })
}

/// Every labelling of `n` vertices with `p` labels, in lexicographic order.
pub fn all_labelings(n: usize, p: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (p as u64).pow(n as u32);
    (0..total).map(move |mut code| {
        let mut labels = vec![0; n];
        for slot in labels.iter_mut() {
            *slot = (code % p as u64) as usize;
            code /= p as u64;
        }
        labels
    })
}

/// Minimum exact nhcut over all labellings that use every cluster with
/// positive volume.
pub fn brute_force_min_nhcut(n: usize, edges: &[Vec<usize>], p: usize) -> Option<(Q, Vec<usize>)> {
    let mut best: Option<(Q, Vec<usize>)> = None;
    for labels in all_labelings(n, p) {
        if let Some(cut) = exact_cut(n, edges, &labels, p) {
            if best.as_ref().is_none_or(|(b, _)| cut.nhcut < *b) {
                best = Some((cut.nhcut, labels));
            }
        }
    }
    best
}

pub fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// `x` equals the rational `q` up to the rounding of a few float operations.
pub fn matches_rational(x: f64, q: Q) -> bool {
    let r = to_f64(q);
    (x - r).abs() <= 4.0 * f64::EPSILON * r.abs().max(f64::MIN_POSITIVE)
}

/// Dense incidence matrix `B` (`n × m`).
pub fn incidence(n: usize, edges: &[Vec<usize>]) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, edges.len());
    for (e, edge) in edges.iter().enumerate() {
        for &v in edge {
            b[(v, e)] = 1.0;
        }
    }
    b
}

/// `(1/α) ln[exp(α X)ᵀ B]` with no shifting; entries whose log argument is
/// zero (no pins) are left at `-inf`.
pub fn naive_smoothed_span(x: &DMatrix<f64>, b: &DMatrix<f64>, alpha: f64) -> DMatrix<f64> {
    let ex = x.map(|v| (alpha * v).exp());
    (ex.transpose() * b).map(|s| s.ln() / alpha)
}

pub fn naive_objective(x: &DMatrix<f64>, b: &DMatrix<f64>, alpha: f64) -> f64 {
    naive_smoothed_span(x, b, alpha).sum()
}

/// Central differences of `f` at every entry of `x`.
pub fn finite_difference_gradient(x: &DMatrix<f64>, step: f64, f: impl Fn(&DMatrix<f64>) -> f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(x.nrows(), x.ncols());
    let mut probe = x.clone();
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            let orig = probe[(i, j)];
            probe[(i, j)] = orig + step;
            let up = f(&probe);
            probe[(i, j)] = orig - step;
            let down = f(&probe);
            probe[(i, j)] = orig;
            g[(i, j)] = (up - down) / (2.0 * step);
        }
    }
    g
}

/// Cayley point `(I + τ/2 A)⁻¹ (I − τ/2 A) X` with an explicit inverse and
/// `A = G Xᵀ − X Gᵀ`.
pub fn cayley_by_inverse(x: &DMatrix<f64>, g: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let n = x.nrows();
    let a = g * x.transpose() - x * g.transpose();
    let id = DMatrix::<f64>::identity(n, n);
    let inv = (&id + &a * (tau / 2.0)).try_inverse().expect("I + τ/2 A is invertible for skew A");
    inv * (&id - &a * (tau / 2.0)) * x
}

/// Clique-expansion weights accumulated pair by pair in a map.
pub fn clique_weights(n: usize, edges: &[Vec<usize>]) -> DMatrix<f64> {
    let mut pairs: HashMap<(usize, usize), f64> = HashMap::new();
    for e in edges {
        for &u in e {
            for &v in e {
                if u != v {
                    *pairs.entry((u, v)).or_default() += 1.0 / e.len() as f64;
                }
            }
        }
    }
    let mut w = DMatrix::zeros(n, n);
    for ((u, v), x) in pairs {
        w[(u, v)] = x;
    }
    w
}

/// Best k-means objective over all 2-way splits of the rows.
pub fn brute_force_two_means(points: &DMatrix<f64>) -> f64 {
    let n = points.nrows();
    let mut best = f64::INFINITY;
    for mask in 1u64..(1 << (n - 1)) {
        let mut total = 0.0;
        for side in [0, 1] {
            let rows: Vec<usize> = (0..n).filter(|&i| ((mask >> i) & 1) as usize == side).collect();
            let sub = points.select_rows(&rows);
            let mean = sub.row_mean();
            total += sub.row_iter().map(|r| (r - &mean).norm_squared()).sum::<f64>();
        }
        best = best.min(total);
    }
    best
}

pub fn frobenius_rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

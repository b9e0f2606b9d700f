//! Exact cut quantities for a discrete partition.
//!
//! For a partition `C = {c_0, .., c_{p-1}}` let `p_e` be the number of
//! clusters touched by edge `e`. Every pair of distinct touched clusters is
//! counted in both orders, so
//!
//! ```text
//! hcut(C)   = Σ_e p_e (p_e - 1)
//! hcut(c_i) = Σ_{e touching c_i} (p_e - 1)
//! nhcut(C)  = Σ_i hcut(c_i) / vol(c_i)
//! ```
//!
//! where `vol(c_i)` is the sum of vertex degrees in `c_i`. The clique-expansion
//! approximations used by the spectral baseline are evaluated alongside.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

/// Hard assignment of every vertex to one of `num_clusters` clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    num_clusters: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, num_clusters: usize) -> Result<Self> {
        if num_clusters == 0 {
            return Err(Error::InvalidParameter("a partition needs at least one cluster".into()));
        }
        if let Some((vertex, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_clusters) {
            return Err(Error::LabelOutOfRange {
                vertex,
                label,
                num_clusters,
            });
        }
        Ok(Partition {
            labels,
            num_clusters,
        })
    }

    /// Everything in cluster 0.
    pub fn single(n: usize) -> Self {
        Partition {
            labels: vec![0; n],
            num_clusters: 1,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    fn check(&self, h: &Hypergraph) -> Result<()> {
        if self.labels.len() != h.num_vertices() {
            return Err(Error::PartitionLength {
                expected: h.num_vertices(),
                got: self.labels.len(),
            });
        }
        Ok(())
    }

    /// Assignment file body: one label per line, newline-terminated.
    pub fn to_assignment(&self) -> String {
        let mut out = String::with_capacity(self.labels.len() * 2);
        for l in &self.labels {
            let _ = writeln!(out, "{l}");
        }
        out
    }

    /// Parses one non-negative integer label per line. When `num_clusters`
    /// is `None` it is inferred as `max label + 1`.
    pub fn parse_assignment(text: &str, num_clusters: Option<usize>) -> Result<Self> {
        let mut labels = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            labels.push(line.parse::<usize>().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad label {line:?}"),
            })?);
        }
        let p = num_clusters.unwrap_or_else(|| labels.iter().max().map_or(1, |m| m + 1));
        Partition::new(labels, p)
    }
}

/// Touched clusters per edge, in compressed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpan {
    offsets: Vec<usize>,
    clusters: Vec<usize>,
}

impl EdgeSpan {
    /// `p_e`, the number of distinct clusters edge `e` touches.
    pub fn count(&self, e: usize) -> usize {
        self.offsets[e + 1] - self.offsets[e]
    }

    /// Sorted clusters touched by edge `e`.
    pub fn clusters(&self, e: usize) -> &[usize] {
        &self.clusters[self.offsets[e]..self.offsets[e + 1]]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Computes `p_e` and the touched-cluster set of every edge.
pub fn edge_span(h: &Hypergraph, part: &Partition) -> Result<EdgeSpan> {
    part.check(h)?;
    let labels = part.labels();
    let mut offsets = Vec::with_capacity(h.num_edges() + 1);
    offsets.push(0);
    let mut clusters = Vec::with_capacity(h.num_edges() * 2);
    let mut stamp = vec![usize::MAX; part.num_clusters()];
    for (e, edge) in h.edges().enumerate() {
        let start = clusters.len();
        for &v in edge {
            let c = labels[v as usize];
            if stamp[c] != e {
                stamp[c] = e;
                clusters.push(c);
            }
        }
        clusters[start..].sort_unstable();
        offsets.push(clusters.len());
    }
    Ok(EdgeSpan { offsets, clusters })
}

/// Ordered-pair hypergraph cut, `Σ_e p_e (p_e - 1)`.
pub fn hcut(h: &Hypergraph, part: &Partition) -> Result<u64> {
    let span = edge_span(h, part)?;
    Ok((0..h.num_edges())
        .map(|e| {
            let pe = span.count(e) as u64;
            pe * (pe - 1)
        })
        .sum())
}

/// `vol(c)` for every cluster.
pub fn volumes(h: &Hypergraph, part: &Partition) -> Result<Vec<u64>> {
    part.check(h)?;
    let mut vol = vec![0u64; part.num_clusters()];
    for (v, &c) in part.labels().iter().enumerate() {
        vol[c] += h.degree(v) as u64;
    }
    Ok(vol)
}

fn positive_volumes(h: &Hypergraph, part: &Partition) -> Result<Vec<u64>> {
    let vol = volumes(h, part)?;
    if let Some(c) = vol.iter().position(|&x| x == 0) {
        return Err(Error::ZeroVolumeCluster(c));
    }
    Ok(vol)
}

fn per_cluster_cut(h: &Hypergraph, span: &EdgeSpan, p: usize) -> Vec<u64> {
    let mut cut = vec![0u64; p];
    for e in 0..h.num_edges() {
        let pe = span.count(e) as u64;
        if pe > 1 {
            for &c in span.clusters(e) {
                cut[c] += pe - 1;
            }
        }
    }
    cut
}

/// Normalized hypergraph cut. Fails on any cluster with zero volume.
pub fn nhcut(h: &Hypergraph, part: &Partition) -> Result<f64> {
    let vol = positive_volumes(h, part)?;
    let span = edge_span(h, part)?;
    let cut = per_cluster_cut(h, &span, part.num_clusters());
    Ok(cut
        .iter()
        .zip(&vol)
        .map(|(&c, &v)| c as f64 / v as f64)
        .sum())
}

/// Dense evaluation of `tr(S Sᵀ (1 1ᵀ − I) (Xᵀ D X)⁻¹)` with `S = sgn(Xᵀ B)`.
///
/// Materializes `n × m` and `p × m` matrices; meant for cross-checking
/// [`nhcut`] on small instances.
pub fn nhcut_matrix_form(h: &Hypergraph, part: &Partition) -> Result<f64> {
    positive_volumes(h, part)?;
    let (n, m, p) = (h.num_vertices(), h.num_edges(), part.num_clusters());
    let x = DMatrix::from_fn(n, p, |v, c| if part.labels()[v] == c { 1.0 } else { 0.0 });
    let mut b = DMatrix::<f64>::zeros(n, m);
    for (e, edge) in h.edges().enumerate() {
        for &v in edge {
            b[(v as usize, e)] = 1.0;
        }
    }
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        h.degrees().into_iter().map(|x| x as f64),
    ));
    let s = (x.transpose() * &b).map(|v: f64| v.signum() * f64::from(v != 0.0));
    let off_diag = DMatrix::from_element(p, p, 1.0) - DMatrix::identity(p, p);
    let xdx = x.transpose() * d * &x;
    let xdx_inv = xdx
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("XᵀDX is singular".into()))?;
    Ok((&s * s.transpose() * off_diag * xdx_inv).trace())
}

/// Clique-expansion approximations `(approx_hcut, approx_nhcut)`.
pub fn approx_cut(h: &Hypergraph, part: &Partition) -> Result<(f64, f64)> {
    let vol = positive_volumes(h, part)?;
    let per_cluster = approx_per_cluster(h, part);
    let total = per_cluster.iter().sum();
    let normalized = per_cluster
        .iter()
        .zip(&vol)
        .map(|(&a, &v)| a / v as f64)
        .sum();
    Ok((total, normalized))
}

fn approx_per_cluster(h: &Hypergraph, part: &Partition) -> Vec<f64> {
    let p = part.num_clusters();
    let labels = part.labels();
    let mut acc = vec![0.0f64; p];
    let mut inside = vec![0usize; p];
    let mut touched = Vec::new();
    for edge in h.edges() {
        let size = edge.len();
        for &v in edge {
            let c = labels[v as usize];
            if inside[c] == 0 {
                touched.push(c);
            }
            inside[c] += 1;
        }
        for &c in &touched {
            let k = inside[c];
            acc[c] += (k * (size - k)) as f64 / size as f64;
            inside[c] = 0;
        }
        touched.clear();
    }
    acc
}

/// Everything the harness reports about one partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutReport {
    pub num_clusters: usize,
    pub hcut: u64,
    pub nhcut: f64,
    pub approx_hcut: f64,
    pub approx_nhcut: f64,
    pub per_cluster_volume: Vec<u64>,
    pub per_cluster_cut: Vec<u64>,
    /// `edge_span_histogram[k]` counts edges touching exactly `k` clusters.
    pub edge_span_histogram: Vec<u64>,
}

/// Scores a partition. All methods go through this one path.
pub fn cut_report(h: &Hypergraph, part: &Partition) -> Result<CutReport> {
    let p = part.num_clusters();
    let vol = positive_volumes(h, part)?;
    let span = edge_span(h, part)?;
    let cut = per_cluster_cut(h, &span, p);
    let mut histogram = vec![0u64; p + 1];
    let mut hcut = 0u64;
    for e in 0..h.num_edges() {
        let pe = span.count(e);
        histogram[pe] += 1;
        hcut += (pe * (pe - 1)) as u64;
    }
    let nhcut = cut.iter().zip(&vol).map(|(&c, &v)| c as f64 / v as f64).sum();
    let approx = approx_per_cluster(h, part);
    let approx_hcut = approx.iter().sum();
    let approx_nhcut = approx.iter().zip(&vol).map(|(&a, &v)| a / v as f64).sum();
    Ok(CutReport {
        num_clusters: p,
        hcut,
        nhcut,
        approx_hcut,
        approx_nhcut,
        per_cluster_volume: vol,
        per_cluster_cut: cut,
        edge_span_histogram: histogram,
    })
}

impl CutReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// `name,p,seed,hcut,nhcut,approx_hcut,approx_nhcut,vol_0..,cut_0..`
    pub fn csv_header(num_clusters: usize) -> String {
        let mut out = String::from("name,p,seed,hcut,nhcut,approx_hcut,approx_nhcut");
        for i in 0..num_clusters {
            let _ = write!(out, ",vol_{i}");
        }
        for i in 0..num_clusters {
            let _ = write!(out, ",cut_{i}");
        }
        out
    }

    pub fn csv_row(&self, name: &str, seed: u64) -> String {
        let mut out = format!(
            "{},{},{},{},{},{},{}",
            name, self.num_clusters, seed, self.hcut, self.nhcut, self.approx_hcut, self.approx_nhcut
        );
        for v in &self.per_cluster_volume {
            let _ = write!(out, ",{v}");
        }
        for c in &self.per_cluster_cut {
            let _ = write!(out, ",{c}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Hypergraph, Partition) {
        let h = Hypergraph::from_edges(4, vec![vec![0, 1, 2], vec![2, 3]]).unwrap();
        (h, Partition::new(vec![0, 0, 1, 1], 2).unwrap())
    }

    #[test]
    fn span_of_toy() {
        let (h, p) = toy();
        let span = edge_span(&h, &p).unwrap();
        assert_eq!(span.counts(), vec![2, 1]);
        assert_eq!(span.clusters(0), &[0, 1]);
        assert_eq!(span.clusters(1), &[1]);

        let one = Partition::single(4);
        assert_eq!(edge_span(&h, &one).unwrap().counts(), vec![1, 1]);
        let scatter = Partition::new(vec![0, 1, 2, 3], 4).unwrap();
        assert_eq!(edge_span(&h, &scatter).unwrap().counts(), vec![3, 2]);
    }

    #[test]
    fn toy_values() {
        let (h, p) = toy();
        assert_eq!(hcut(&h, &p).unwrap(), 2);
        assert!((nhcut(&h, &p).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert!((nhcut_matrix_form(&h, &p).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        let (a, an) = approx_cut(&h, &p).unwrap();
        assert!((a - 4.0 / 3.0).abs() < 1e-15);
        assert!((an - 5.0 / 9.0).abs() < 1e-15);

        let r = cut_report(&h, &p).unwrap();
        assert_eq!(r.per_cluster_volume, vec![2, 3]);
        assert_eq!(r.per_cluster_cut, vec![1, 1]);
        assert_eq!(r.edge_span_histogram, vec![0, 1, 1]);
    }

    #[test]
    fn all_ordered_pairs() {
        let h = Hypergraph::from_edges(3, vec![vec![0, 1, 2]]).unwrap();
        let p = Partition::new(vec![0, 1, 2], 3).unwrap();
        assert_eq!(hcut(&h, &p).unwrap(), 6);
    }

    #[test]
    fn single_cluster_is_zero() {
        let (h, _) = toy();
        let one = Partition::single(4);
        assert_eq!(hcut(&h, &one).unwrap(), 0);
        assert_eq!(nhcut(&h, &one).unwrap(), 0.0);
        assert_eq!(nhcut_matrix_form(&h, &one).unwrap(), 0.0);
        assert_eq!(approx_cut(&h, &one).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn empty_or_zero_volume_cluster_fails() {
        let (h, _) = toy();
        let empty = Partition::new(vec![0, 0, 0, 0], 2).unwrap();
        assert!(matches!(nhcut(&h, &empty), Err(Error::ZeroVolumeCluster(1))));
        assert!(matches!(nhcut_matrix_form(&h, &empty), Err(Error::ZeroVolumeCluster(1))));
        // hcut has no volume requirement.
        assert_eq!(hcut(&h, &empty).unwrap(), 0);

        let iso = Hypergraph::from_edges(3, vec![vec![0, 1]]).unwrap();
        let alone = Partition::new(vec![0, 0, 1], 2).unwrap();
        assert!(matches!(cut_report(&iso, &alone), Err(Error::ZeroVolumeCluster(1))));
    }

    #[test]
    fn label_and_length_errors() {
        let (h, _) = toy();
        assert!(matches!(
            Partition::new(vec![0, 2], 2),
            Err(Error::LabelOutOfRange { vertex: 1, label: 2, .. })
        ));
        let short = Partition::new(vec![0, 1, 1], 2).unwrap();
        assert!(matches!(edge_span(&h, &short), Err(Error::PartitionLength { .. })));
    }

    #[test]
    fn assignment_text() {
        let p = Partition::new(vec![0, 2, 1], 3).unwrap();
        assert_eq!(p.to_assignment(), "0\n2\n1\n");
        assert_eq!(Partition::parse_assignment("0\n2\n1\n", None).unwrap(), p);
        assert!(Partition::parse_assignment("0\n-1\n", None).is_err());
        assert!(Partition::parse_assignment("0\n3\n", Some(3)).is_err());
    }

    #[test]
    fn csv_and_json() {
        let (h, p) = toy();
        let r = cut_report(&h, &p).unwrap();
        assert_eq!(
            CutReport::csv_header(2),
            "name,p,seed,hcut,nhcut,approx_hcut,approx_nhcut,vol_0,vol_1,cut_0,cut_1"
        );
        let row = r.csv_row("toy", 7);
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 11);
        assert_eq!(cols[4].parse::<f64>().unwrap(), r.nhcut);
        let back: CutReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}

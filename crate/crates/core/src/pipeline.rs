//! The full relaxed pipeline: optimize on the Stiefel manifold, discretize
//! the rows with k-means, score with the exact cut metrics.

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use nalgebra::DMatrix;

use crate::kmeans::{kmeans, Features, KMeansConfig};
use crate::metrics::{cut_report, CutReport, Partition};
use crate::stiefel::{optimize, OptimizerConfig, OptimizerTrace};

#[derive(Debug, Clone)]
pub struct RnhcOutcome {
    pub partition: Partition,
    pub report: CutReport,
    /// `None` when `p = 1` and nothing was optimized.
    pub trace: Option<OptimizerTrace>,
}

/// Runs the optimizer from `config.seed`, clusters the rows of the final
/// embedding into `p` groups and scores the result.
///
/// A k-means run that cannot fill all `p` clusters is reported as
/// [`Error::KMeansDegenerate`]; callers running repeated trials count it as a
/// failed trial.
pub fn rnhc(
    h: &Hypergraph,
    p: usize,
    config: &OptimizerConfig,
    kmeans_config: &KMeansConfig,
    features: Features,
) -> Result<RnhcOutcome> {
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
        return Ok(RnhcOutcome {
            partition,
            report,
            trace: None,
        });
    }
    let (embedding, trace) = optimize(h, p, config)?;
    let points = features.apply(embedding.matrix());
    let partition = discretize(h, &points, &KMeansConfig { k: p, ..kmeans_config.clone() })?;
    let report = cut_report(h, &partition)?;
    Ok(RnhcOutcome {
        partition,
        report,
        trace: Some(trace),
    })
}

/// Clusters the rows of `points` into `config.k` groups.
///
/// Vertices of degree zero enter neither a cut nor a volume, so they are left
/// out of k-means and afterwards joined to the nearest centroid. Otherwise a
/// cluster made only of them would have zero volume.
pub fn discretize(h: &Hypergraph, points: &DMatrix<f64>, config: &KMeansConfig) -> Result<Partition> {
    let n = h.num_vertices();
    if points.nrows() != n {
        return Err(Error::Dimension(format!(
            "{} embedding rows for {n} vertices",
            points.nrows()
        )));
    }
    let k = config.k;
    let active: Vec<usize> = (0..n).filter(|&v| h.degree(v) > 0).collect();
    if active.len() < k {
        return Err(Error::KMeansDegenerate(k));
    }
    if active.len() == n {
        let km = kmeans(points, config)?;
        if km.failed {
            return Err(Error::KMeansDegenerate(k));
        }
        return Partition::new(km.labels, k);
    }
    let km = kmeans(&points.select_rows(&active), config)?;
    if km.failed {
        return Err(Error::KMeansDegenerate(k));
    }
    let mut labels = vec![usize::MAX; n];
    for (&v, &l) in active.iter().zip(&km.labels) {
        labels[v] = l;
    }
    for (v, label) in labels.iter_mut().enumerate() {
        if *label == usize::MAX {
            let row = points.row(v);
            *label = (0..k)
                .min_by(|&a, &b| {
                    let da = (km.centroids.row(a) - row).norm_squared();
                    let db = (km.centroids.row(b) - row).norm_squared();
                    da.total_cmp(&db)
                })
                .unwrap_or(0);
        }
    }
    Partition::new(labels, k)
}

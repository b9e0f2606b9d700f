//! Normalized hypergraph cut by relaxation onto the Stiefel manifold.
//!
//! The crate covers the whole pipeline:
//!
//! * [`hypergraph`]: sparse incidence storage and the hMetis `.hgr` format
//! * [`metrics`]: exact `hcut`, `nhcut` and the clique-expansion approximations
//! * [`smoothed`]: the log-sum-exp relaxation of the edge-span matrix and its gradient
//! * [`stiefel`]: Cayley-transform curvilinear search with Armijo backtracking
//! * [`kmeans`]: discretization of the relaxed solution
//! * [`spectral`]: the clique-expansion spectral clustering baseline
//! * [`bench`]: best-of-R trial harness with CSV output
//!
//! ```
//! use rnhc::{parse_hgr, rnhc, Features, KMeansConfig, OptimizerConfig};
//!
//! let h = parse_hgr(b"4 6\n1 2\n2 3\n4 5\n5 6\n").unwrap();
//! let out = rnhc(&h, 2, &OptimizerConfig::default(), &KMeansConfig::new(2), Features::Raw).unwrap();
//! assert_eq!(out.report.hcut, 0);
//! ```

pub mod bench;
pub mod embedding;
pub mod error;
pub mod hypergraph;
pub mod kmeans;
pub mod lanczos;
pub mod manifest;
pub mod metrics;
pub mod pipeline;
pub mod smoothed;
pub mod spectral;
pub mod stiefel;

pub use crate::embedding::Embedding;
pub use crate::error::{Error, Result};
pub use crate::hypergraph::{parse_hgr, read_hgr, Hypergraph};
pub use crate::kmeans::{kmeans, Features, KMeansConfig, KMeansResult};
pub use crate::manifest::{verify_manifest, DatasetManifest, ManifestCheck, ManifestEntry};
pub use crate::metrics::{
    approx_cut, cut_report, edge_span, hcut, nhcut, nhcut_matrix_form, CutReport, EdgeSpan, Partition,
};
pub use crate::pipeline::{discretize, rnhc, RnhcOutcome};
pub use crate::smoothed::{gradient, objective, objective_and_gradient, smoothed_span, SmoothedSpan};
pub use crate::spectral::{clique_expand, smallest_eigenvectors, spectral_partition, ExpandedGraph, SpectralOptions};
pub use crate::stiefel::{optimize, random_orthonormal, OptimizerConfig, OptimizerTrace, Termination};

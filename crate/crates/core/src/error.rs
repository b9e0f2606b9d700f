use thiserror::Error;

/// Errors raised across the partitioning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("hMetis format code {0} carries weights, which are not supported")]
    UnsupportedFormat(u32),

    #[error("empty hypergraph")]
    EmptyHypergraph,

    #[error("vertex index {index} out of range [1, {n}] on line {line}")]
    VertexOutOfRange { index: u64, n: usize, line: usize },

    #[error("expected {expected} edge lines, found {found}")]
    MissingEdges { expected: usize, found: usize },

    #[error("label {label} at vertex {vertex} is not below {num_clusters}")]
    LabelOutOfRange {
        vertex: usize,
        label: usize,
        num_clusters: usize,
    },

    #[error("partition covers {got} vertices, hypergraph has {expected}")]
    PartitionLength { expected: usize, got: usize },

    #[error("cluster {0} has zero volume")]
    ZeroVolumeCluster(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular {0}x{0} system in the Cayley transform")]
    SingularSystem(usize),

    #[error("k-means could not produce {0} non-empty clusters")]
    KMeansDegenerate(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest entry of `|XᵀX − I|`.
pub fn orthogonality_drift(x: &DMatrix<f64>) -> f64 {
    let gram = x.transpose() * x;
    let p = gram.nrows();
    let mut worst = 0.0f64;
    for j in 0..p {
        for i in 0..p {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// `n × p` real matrix with orthonormal columns: a point on the Stiefel
/// manifold and the relaxed form of a cluster indicator matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    values: DMatrix<f64>,
}

impl Embedding {
    /// Accepts matrices whose columns are orthonormal to within `1e-8`.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding"));
        }
        if values.ncols() > values.nrows() {
            return Err(Error::Dimension(format!(
                "{} columns cannot be orthonormal in dimension {}",
                values.ncols(),
                values.nrows()
            )));
        }
        let drift = orthogonality_drift(&values);
        if drift > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "columns are not orthonormal (max |XᵀX − I| = {drift:.3e})"
            )));
        }
        Ok(Embedding { values })
    }

    pub(crate) fn new_unchecked(values: DMatrix<f64>) -> Self {
        Embedding { values }
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.values
    }

    pub fn drift(&self) -> f64 {
        orthogonality_drift(&self.values)
    }
}

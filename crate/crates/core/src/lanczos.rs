//! Thick-restart Lanczos for the largest eigenpairs of a symmetric operator
//! given only through matrix-vector products.
//!
//! The basis is kept fully orthogonal (classical Gram–Schmidt, two passes),
//! so the projected matrix is assembled from the orthogonalization
//! coefficients directly and stays exact across restarts.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LanczosConfig {
    /// Largest basis size before a restart.
    pub max_basis: usize,
    /// Residual `‖M x − θ x‖` below which a Ritz pair counts as converged.
    pub tolerance: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl LanczosConfig {
    pub fn for_count(p: usize) -> Self {
        LanczosConfig {
            max_basis: (4 * p + 20).max(40),
            tolerance: 1e-8,
            max_restarts: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    /// Descending.
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub matvecs: usize,
}

/// Computes the `count` largest eigenpairs of the symmetric operator `op`
/// acting on vectors of length `n`.
pub fn largest_eigenpairs<F>(n: usize, count: usize, config: &LanczosConfig, mut op: F) -> Result<LanczosResult>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if count == 0 || count > n {
        return Err(Error::Dimension(format!("cannot extract {count} eigenpairs in dimension {n}")));
    }
    let kmax = config.max_basis.min(n).max(count + 1).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut basis = DMatrix::<f64>::zeros(n, kmax);
    let mut proj = DMatrix::<f64>::zeros(kmax, kmax);

    let mut start = random_unit(n, &mut rng);
    orthogonalize(&basis, 0, &mut start);
    basis.column_mut(0).copy_from(&start);

    let mut w = DVector::<f64>::zeros(n);
    let mut first = 0;
    let mut matvecs = 0;
    let mut restarts = 0;
    loop {
        let mut residual_norm = 0.0;
        let mut filled = kmax;
        for j in first..kmax {
            op(basis.column(j).as_slice(), w.as_mut_slice());
            matvecs += 1;
            let coeffs = orthogonalize(&basis, j + 1, &mut w);
            for i in 0..=j {
                proj[(i, j)] = coeffs[i];
                proj[(j, i)] = coeffs[i];
            }
            let beta = w.norm();
            if j + 1 == kmax {
                residual_norm = beta;
                break;
            }
            if beta <= 1e-12 * coeffs.amax().max(1.0) {
                // Invariant subspace: continue with a fresh direction.
                let mut fresh = random_unit(n, &mut rng);
                orthogonalize(&basis, j + 1, &mut fresh);
                let norm = fresh.norm();
                if norm <= 1e-12 {
                    filled = j + 1;
                    residual_norm = 0.0;
                    break;
                }
                basis.column_mut(j + 1).copy_from(&(fresh / norm));
            } else {
                basis.column_mut(j + 1).copy_from(&(&w / beta));
            }
        }

        let small = proj.view((0, 0), (filled, filled)).clone_owned();
        let eig = SymmetricEigen::new(small);
        let mut order: Vec<usize> = (0..filled).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let residuals: Vec<f64> = order
            .iter()
            .map(|&i| residual_norm * eig.eigenvectors[(filled - 1, i)].abs())
            .collect();
        let converged = filled < kmax
            || residuals[..count].iter().all(|&r| r <= config.tolerance);

        if converged || restarts >= config.max_restarts || filled < kmax {
            let active = basis.columns(0, filled);
            let mut vectors = DMatrix::zeros(n, count);
            for (slot, &i) in order[..count].iter().enumerate() {
                vectors.column_mut(slot).copy_from(&(&active * eig.eigenvectors.column(i)));
            }
            return Ok(LanczosResult {
                values: order[..count].iter().map(|&i| eig.eigenvalues[i]).collect(),
                vectors,
                residuals: residuals[..count].to_vec(),
                converged,
                matvecs,
            });
        }

        restarts += 1;
        let keep = ((count + kmax) / 2).max(count).min(kmax - 1);
        let mut kept = DMatrix::zeros(n, keep);
        for (slot, &i) in order[..keep].iter().enumerate() {
            kept.column_mut(slot).copy_from(&(&basis * eig.eigenvectors.column(i)));
        }
        basis.columns_mut(0, keep).copy_from(&kept);
        let next = &w / residual_norm;
        basis.column_mut(keep).copy_from(&next);
        for c in keep + 1..kmax {
            basis.column_mut(c).fill(0.0);
        }
        proj.fill(0.0);
        for (slot, &i) in order[..keep].iter().enumerate() {
            proj[(slot, slot)] = eig.eigenvalues[i];
        }
        first = keep;
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let v: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
    let norm = v.norm();
    v / norm
}

/// Removes from `w` its components along the first `cols` basis vectors
/// (two Gram–Schmidt passes); returns the accumulated coefficients.
fn orthogonalize(basis: &DMatrix<f64>, cols: usize, w: &mut DVector<f64>) -> DVector<f64> {
    let mut total = DVector::zeros(cols);
    if cols == 0 {
        return total;
    }
    let active = basis.columns(0, cols);
    for _ in 0..2 {
        let c = active.tr_mul(w);
        w.gemv(-1.0, &active, &c, 1.0);
        total += c;
    }
    total
}

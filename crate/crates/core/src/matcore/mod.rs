//! Sparse matrix and permutation primitives.
//!
//! All indices are 0-based in memory; the Matrix Market and permutation file
//! formats in [`io`] are 1-based on disk. Matrices are real and entrywise
//! nonnegative, so the adjoint of a matrix is its transpose.

mod generate;
pub mod io;
mod permutation;
mod sparse;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{birkhoff_mixture, matching_sum, perfect_matching, random_perfect_matching, uniform};
pub use permutation::{sample_permutation, Permutation};
pub use sparse::SparseMatrix;

/// Default tolerance for row/column sum checks on floating-point input.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest dimension handled by dense eigenvalue routines.
pub const DENSE_CAP: usize = 2048;

/// Outcome of [`validate_regular`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub is_regular: bool,
    /// Mean row sum.
    pub delta: f64,
    pub max_row_dev: f64,
    pub max_col_dev: f64,
}

/// Checks that every row and column sum of `q` equals a common value
/// within `tol`. The common value is taken to be the mean row sum.
pub fn validate_regular(q: &SparseMatrix, tol: f64) -> Result<RegularityReport> {
    if q.n() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if !(tol >= 0.0) {
        return Err(Error::param(format!("tolerance {tol} must be nonnegative")));
    }
    let rows = q.row_sums();
    let cols = q.col_sums();
    let delta = rows.iter().sum::<f64>() / q.n() as f64;
    let dev = |s: &[f64]| s.iter().map(|v| (v - delta).abs()).fold(0.0, f64::max);
    let max_row_dev = dev(&rows);
    let max_col_dev = dev(&cols);
    Ok(RegularityReport {
        is_regular: max_row_dev.max(max_col_dev) <= tol,
        delta,
        max_row_dev,
        max_col_dev,
    })
}

/// Like [`validate_regular`] but turns a failed check into an error.
pub fn require_regular(q: &SparseMatrix, tol: f64) -> Result<RegularityReport> {
    let rep = validate_regular(q, tol)?;
    if !rep.is_regular {
        return Err(Error::NotRegular {
            max_row_dev: rep.max_row_dev,
            max_col_dev: rep.max_col_dev,
            tol,
        });
    }
    Ok(rep)
}

/// `max(‖B‖∞→∞, ‖Bᵀ‖∞→∞)`: the largest absolute row or column sum.
pub fn inf_norm_star(b: &SparseMatrix) -> f64 {
    let rows = b.row_sums().into_iter().fold(0.0, f64::max);
    let cols = b.col_sums().into_iter().fold(0.0, f64::max);
    rows.max(cols)
}

/// `max(‖B‖0→1, ‖Bᵀ‖0→1)`: the largest number of nonzeros in a row or column.
pub fn zero_one_norm_star(b: &SparseMatrix) -> usize {
    let (rows, cols) = b.support_counts();
    rows.into_iter().chain(cols).max().unwrap_or(0)
}

fn check_unit_interval(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::param(format!("mixing weight r = {r} outside [0, 1]")));
    }
    Ok(())
}

/// `P = (1 - r) M + r Q` with `M` the permutation matrix of `m`.
pub fn build_p(m: &Permutation, q: &SparseMatrix, r: f64) -> Result<SparseMatrix> {
    check_unit_interval(r)?;
    combine(m, q, 1.0 - r, r)
}

/// Unnormalized `P = M + Q`.
pub fn build_sum(m: &Permutation, q: &SparseMatrix) -> Result<SparseMatrix> {
    combine(m, q, 1.0, 1.0)
}

fn combine(m: &Permutation, q: &SparseMatrix, wm: f64, wq: f64) -> Result<SparseMatrix> {
    if m.n() != q.n() {
        return Err(Error::DimensionMismatch {
            expected: q.n(),
            found: m.n(),
        });
    }
    let mut t: Vec<_> = q.triplets().map(|(i, j, v)| (i, j, wq * v)).collect();
    t.extend(m.as_slice().iter().enumerate().map(|(x, &y)| (x, y, wm)));
    SparseMatrix::from_triplets(q.n(), t)
}

/// `Q' = r / (1 - r) · Q`, so that `(1 - r) M + r Q = (1 - r)(M + Q')`.
pub fn rescale_for_convex(q: &SparseMatrix, r: f64) -> Result<SparseMatrix> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::param(format!("mixing weight r = {r} outside (0, 1)")));
    }
    q.scaled(r / (1.0 - r))
}

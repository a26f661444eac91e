//! Free-probability bounds on the second eigenvalue of `P = (1 - r) M + r Q`,
//! where `M` is a uniform random permutation matrix and `Q` a nonnegative
//! matrix with constant row and column sums.
//!
//! The bound `ρ(ℓ₀) = max{‖(u + q)^{ℓ₀}‖^{1/ℓ₀}, 2κ(Q), ‖Q‖*∞→∞}` is computed
//! from `Q` alone: the norm term through exact moments of `u + q`
//! ([`moments`]) or a quasi-tree simulation ([`quasitree`]), the sparsity
//! term through [`kappa`]. [`harness`] samples permutations and measures
//! `|λ₂|` to stress-test the bound.

pub mod certificate;
pub mod error;
pub mod harness;
pub mod kappa;
pub mod matcore;
pub mod moments;
pub mod quasitree;
pub mod rng;

pub use certificate::{certify, certify_convex, Certificate, Estimator};
pub use error::{Error, Result};
pub use matcore::{Permutation, SparseMatrix};

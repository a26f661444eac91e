use rand::Rng as _;

use crate::error::{Error, Result};
use crate::matcore::{Permutation, SparseMatrix};
use crate::rng::{derive_seed, rng_from_seed};

/// Perfect matching `S U Sᵀ`, where `U` swaps the pairs `(2i, 2i+1)` and
/// `S` is the permutation matrix of `s`. Entry `(x, y)` is 1 exactly when
/// `s(x)` and `s(y)` form one of the swapped pairs.
pub fn perfect_matching(n: usize, s: &Permutation) -> Result<SparseMatrix> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::param(format!("perfect matching needs a positive even size, got {n}")));
    }
    if s.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: s.n(),
        });
    }
    let inv = s.inverse();
    let t = (0..n)
        .map(|x| (x, inv.apply(s.apply(x) ^ 1), 1.0))
        .collect();
    SparseMatrix::from_triplets(n, t)
}

pub fn random_perfect_matching(n: usize, seed: u64) -> Result<SparseMatrix> {
    if n == 0 {
        return Err(Error::param("perfect matching needs a positive even size, got 0"));
    }
    let s = Permutation::sample_with(n, &mut rng_from_seed(seed));
    perfect_matching(n, &s)
}

/// `(1/d)` times the sum of `d` independent random perfect matchings: the
/// normalized adjacency matrix of a random `d`-regular multigraph.
pub fn matching_sum(n: usize, d: usize, seed: u64) -> Result<SparseMatrix> {
    if d == 0 {
        return Err(Error::param("degree must be at least 1"));
    }
    let mut t = Vec::with_capacity(n * d);
    for i in 0..d {
        let m = random_perfect_matching(n, derive_seed(seed, i as u64))?;
        t.extend(m.triplets().map(|(x, y, _)| (x, y, 1.0 / d as f64)));
    }
    SparseMatrix::from_triplets(n, t)
}

/// Random bistochastic matrix `Σ w_i M_i` over `k` uniform permutations
/// with weights drawn uniformly from `[0.1, 1]` and normalized to sum 1.
pub fn birkhoff_mixture(n: usize, k: usize, seed: u64) -> Result<SparseMatrix> {
    if n == 0 || k == 0 {
        return Err(Error::param("birkhoff mixture needs n >= 1 and k >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut t = Vec::with_capacity(n * k);
    for wi in w {
        let p = Permutation::sample_with(n, &mut rng);
        t.extend(p.as_slice().iter().enumerate().map(|(x, &y)| (x, y, wi / total)));
    }
    SparseMatrix::from_triplets(n, t)
}

/// `(1/n) J`.
pub fn uniform(n: usize) -> Result<SparseMatrix> {
    SparseMatrix::from_dense(n, &vec![1.0 / n as f64; n * n])
}

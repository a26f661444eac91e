use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::SparseMatrix;
use crate::rng::{rng_from_seed, Rng};

/// A bijection `x -> map[x]` on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &y in &map {
            if y >= map.len() || seen[y] {
                return Err(Error::param(format!(
                    "not a bijection on 0..{}: image {y} repeated or out of range",
                    map.len()
                )));
            }
            seen[y] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            inv[y] = x;
        }
        Permutation { map: inv }
    }

    /// Permutation matrix `M` with `M[x][σ(x)] = 1`.
    pub fn to_matrix(&self) -> SparseMatrix {
        let t = self.map.iter().enumerate().map(|(x, &y)| (x, y, 1.0)).collect();
        SparseMatrix::from_triplets(self.map.len(), t).expect("permutation entries are valid")
    }

    /// Uniform draw from S_n using the supplied generator (Fisher-Yates).
    pub fn sample_with(n: usize, rng: &mut Rng) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Permutation { map }
    }
}

/// Uniform random permutation of `0..n`, deterministic in `seed`.
pub fn sample_permutation(n: usize, seed: u64) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::param("permutation size must be at least 1"));
    }
    Ok(Permutation::sample_with(n, &mut rng_from_seed(seed)))
}

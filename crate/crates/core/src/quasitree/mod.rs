//! Monte Carlo oracle on random quasi-trees.
//!
//! [`Simulator`] draws independent quasi-trees, applies words in `u`, `q`
//! and `p = u + q` to basis vectors, and averages `⟨a e_α, e_α⟩` over trees
//! and uniform roots `α` to estimate `Φ(a)`.

mod tree;
mod word;

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::SparseMatrix;
use crate::rng::{derive_seed, rng_from_seed};

pub use tree::{LocalOperator, NodeId, QuasiTree, QuasiTreeVector, Sign, TreeVertex};
pub use word::{Letter, Word};

/// Default cap on the number of stored amplitudes in a single vector.
pub const DEFAULT_SUPPORT_LIMIT: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiEstimate {
    pub mean: f64,
    /// Standard error of the mean; `None` with fewer than two trials.
    pub stderr: Option<f64>,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    /// Largest `(‖p^ℓ v‖ / ‖v‖)^{1/ℓ}` seen, a lower estimate of `‖p^ℓ‖^{1/ℓ}`.
    pub estimate: f64,
    pub ell: usize,
    pub trials: usize,
    pub iters: usize,
}

#[derive(Debug, Clone)]
pub struct Simulator {
    q: LocalOperator,
    qt: LocalOperator,
    n: usize,
    seed: u64,
    support_limit: usize,
}

pub fn new_simulator(q: &SparseMatrix, seed: u64) -> Result<Simulator> {
    if q.n() == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(Simulator {
        q: LocalOperator::from_matrix(q),
        qt: LocalOperator::adjoint_of(q),
        n: q.n(),
        seed,
        support_limit: DEFAULT_SUPPORT_LIMIT,
    })
}

impl Simulator {
    pub fn with_support_limit(mut self, limit: usize) -> Self {
        self.support_limit = limit;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The quasi-tree used by trial `index`.
    pub fn tree(&self, index: usize) -> QuasiTree {
        QuasiTree::new(
            self.n,
            derive_seed(self.seed, 2 * index as u64),
            self.support_limit,
        )
    }

    fn root_for(&self, index: usize) -> usize {
        rng_from_seed(derive_seed(self.seed, 2 * index as u64 + 1)).random_range(0..self.n)
    }

    pub fn apply_letter(
        &self,
        tree: &mut QuasiTree,
        v: &QuasiTreeVector,
        letter: Letter,
    ) -> Result<QuasiTreeVector> {
        Ok(match letter {
            Letter::U => tree.apply_u(v),
            Letter::UStar => tree.apply_u_star(v),
            Letter::Q => tree.apply_local(v, &self.q)?,
            Letter::QStar => tree.apply_local(v, &self.qt)?,
            Letter::P => {
                let mut out = tree.apply_u(v);
                out.axpy(1.0, &tree.apply_local(v, &self.q)?);
                out
            }
            Letter::PStar => {
                let mut out = tree.apply_u_star(v);
                out.axpy(1.0, &tree.apply_local(v, &self.qt)?);
                out
            }
        })
    }

    /// Applies `word` with its rightmost letter first.
    pub fn apply_word(
        &self,
        tree: &mut QuasiTree,
        v: &QuasiTreeVector,
        word: &Word,
    ) -> Result<QuasiTreeVector> {
        let mut cur = v.clone();
        for &l in word.letters().iter().rev() {
            cur = self.apply_letter(tree, &cur, l)?;
        }
        Ok(cur)
    }

    /// `⟨w e_α, e_α⟩` on a single tree.
    pub fn root_trace(&self, tree: &mut QuasiTree, word: &Word, alpha: usize) -> Result<f64> {
        let root = tree.root(alpha);
        let out = self.apply_word(tree, &QuasiTreeVector::basis(root), word)?;
        Ok(out.get(root))
    }

    pub fn estimate_phi(&self, word: &Word, trials: usize) -> Result<PhiEstimate> {
        if trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        let samples: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut tree = self.tree(t);
                self.root_trace(&mut tree, word, self.root_for(t))
            })
            .collect::<Result<_>>()?;
        let mean = samples.iter().sum::<f64>() / trials as f64;
        let stderr = (trials > 1).then(|| {
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            (var / trials as f64).sqrt()
        });
        Ok(PhiEstimate {
            mean,
            stderr,
            trials,
        })
    }

    /// Power iteration for `‖p^ℓ‖^{1/ℓ}` started from random nonnegative
    /// vectors on the roots. Each iteration applies `(p*)^ℓ p^ℓ`; the support
    /// grows like `(n + 1)^ℓ` per application of `p^ℓ`, so few iterations
    /// are affordable.
    pub fn estimate_norm_power(&self, ell: usize, trials: usize, iters: usize) -> Result<NormEstimate> {
        if ell == 0 || trials == 0 || iters == 0 {
            return Err(Error::param("ell, trials and iters must be at least 1"));
        }
        let forward = Word::power(Letter::P, ell);
        let backward = Word::power(Letter::PStar, ell);
        let best: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<f64> {
                let mut tree = self.tree(t);
                let mut rng = rng_from_seed(derive_seed(self.seed, 2 * t as u64 + 1));
                let mut v = QuasiTreeVector::default();
                for k in 0..self.n {
                    v.add(tree.root(k), rng.random_range(0.0..1.0));
                }
                let mut best = 0.0f64;
                for _ in 0..iters {
                    let vn = v.norm_sq();
                    if vn == 0.0 {
                        break;
                    }
                    let w = self.apply_word(&mut tree, &v, &forward)?;
                    best = best.max(w.norm_sq() / vn);
                    v = self.apply_word(&mut tree, &w, &backward)?;
                    let s = v.norm_sq().sqrt();
                    if s > 0.0 {
                        v.scale(1.0 / s);
                    }
                }
                Ok(best)
            })
            .collect::<Result<_>>()?;
        let top = best.into_iter().fold(0.0f64, f64::max);
        Ok(NormEstimate {
            estimate: top.powf(1.0 / (2 * ell) as f64),
            ell,
            trials,
            iters,
        })
    }

    /// `⟨u^{a_1} B_1 u^{a_2} B_2 ⋯ u^{a_m} B_m e(k), e(k)⟩` on one tree, with the
    /// rightmost factor acting first.
    pub fn alternating_trace(
        &self,
        tree: &mut QuasiTree,
        factors: &[(i64, LocalOperator)],
        k: usize,
    ) -> Result<f64> {
        let root = tree.root(k);
        let mut cur = QuasiTreeVector::basis(root);
        for (a, b) in factors.iter().rev() {
            cur = tree.apply_local(&cur, b)?;
            cur = tree.apply_shift_power(&cur, *a);
        }
        Ok(cur.get(root))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{birkhoff_mixture, random_perfect_matching};

    #[test]
    fn pure_shift_words_have_delta_trace() {
        let q = birkhoff_mixture(5, 2, 1).unwrap();
        let sim = new_simulator(&q, 9).unwrap();
        let mut tree = sim.tree(0);
        for w in ["u", "U", "u2", "uU", "Uu", "u3U3", "u2Uu"] {
            let word: Word = w.parse().unwrap();
            let balanced = word
                .letters()
                .iter()
                .map(|l| if *l == Letter::U { 1i64 } else { -1 })
                .sum::<i64>()
                == 0;
            let want = if balanced { 1.0 } else { 0.0 };
            assert_eq!(sim.root_trace(&mut tree, &word, 3).unwrap(), want, "{w}");
        }
    }

    #[test]
    fn q_words_reproduce_matrix_trace() {
        let q = random_perfect_matching(6, 4).unwrap();
        let sim = new_simulator(&q, 2).unwrap();
        let mut tree = sim.tree(0);
        let w: Word = "q2".parse().unwrap();
        for a in 0..6 {
            assert_eq!(sim.root_trace(&mut tree, &w, a).unwrap(), 1.0);
        }
    }

    #[test]
    fn phi_of_pp_star_is_one_plus_frobenius() {
        let q = birkhoff_mixture(4, 2, 6).unwrap();
        let sim = new_simulator(&q, 5).unwrap();
        let est = sim.estimate_phi(&Word::moment(1, 1), 400).unwrap();
        let fro = q.triplets().map(|(_, _, v)| v * v).sum::<f64>() / 4.0;
        let se = est.stderr.unwrap();
        assert!((est.mean - (1.0 + fro)).abs() <= 4.0 * se + 1e-12);
    }

    #[test]
    fn norm_estimate_at_least_one() {
        let q = birkhoff_mixture(4, 2, 6).unwrap();
        let sim = new_simulator(&q, 5).unwrap();
        let e = sim.estimate_norm_power(2, 2, 1).unwrap();
        assert!(e.estimate >= 1.0);
        assert!(e.estimate <= 2.0 + 1e-9);
    }

    #[test]
    fn estimates_are_reproducible() {
        let q = birkhoff_mixture(4, 2, 6).unwrap();
        let w = Word::moment(2, 2);
        let a = new_simulator(&q, 77).unwrap().estimate_phi(&w, 50).unwrap();
        let b = new_simulator(&q, 77).unwrap().estimate_phi(&w, 50).unwrap();
        assert_eq!(a, b);
    }
}

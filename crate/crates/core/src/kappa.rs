//! The sparsity functional `κ_L(B)`.
//!
//! ```text
//! κ_L(B) = max_{1 ≤ p ≤ L, x, y} A_{x,y,p}^{1/p},
//! A_{x,y,p} = Σ_{k ≤ p} Σ_{λ_1+…+λ_k = p, λ_t ≤ ℓ(B)} Π_t (B^{λ_t})_{x,y},
//! ```
//!
//! with support depth `ℓ(B) = ln N / (6 ln ‖B‖*_{0→1})`. For a fixed entry
//! `(x, y)` the composition sum factorizes over parts, so with
//! `e_λ = (B^λ)_{x,y}` it is computed by
//! `G_k(p) = Σ_λ e_λ G_{k-1}(p - λ)`, `G_0(0) = 1`, `A = Σ_{k=1}^{p} G_k(p)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matcore::{zero_one_norm_star, SparseMatrix};

/// `ℓ(B)`, or unbounded when `‖B‖*_{0→1} ≤ 1` makes the logarithm vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportDepth {
    Finite(f64),
    Unbounded,
}

impl SupportDepth {
    /// Largest integer part size allowed, `None` when unbounded. The floor
    /// absorbs rounding so that an exact integer depth is not lost.
    pub fn part_cap(self) -> Option<usize> {
        match self {
            SupportDepth::Finite(x) => Some((x + 1e-9).floor().max(0.0) as usize),
            SupportDepth::Unbounded => None,
        }
    }
}

impl Serialize for SupportDepth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SupportDepth::Finite(x) => s.serialize_f64(*x),
            SupportDepth::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

/// Which compositions enter `A_{x,y,p}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompositionKind {
    /// Parts `λ_t ≥ 0`, at most `p` of them.
    #[default]
    Weak,
    /// Parts `λ_t ≥ 1`.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KappaArgmax {
    pub p: usize,
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaResult {
    pub kappa_l: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub support_depth: SupportDepth,
    pub part_cap: Option<usize>,
    pub compositions: CompositionKind,
    /// `None` when every `A_{x,y,p}` vanishes.
    pub argmax: Option<KappaArgmax>,
}

pub fn support_depth(b: &SparseMatrix) -> Result<SupportDepth> {
    let n = b.n();
    if n <= 1 {
        return Err(Error::param(format!("support depth needs n >= 2, got {n}")));
    }
    let d = zero_one_norm_star(b);
    if d <= 1 {
        return Ok(SupportDepth::Unbounded);
    }
    Ok(SupportDepth::Finite((n as f64).ln() / (6.0 * (d as f64).ln())))
}

pub fn kappa_l(b: &SparseMatrix, l: usize) -> Result<KappaResult> {
    kappa_l_with(b, l, CompositionKind::Weak)
}

/// `κ(B)` approximated by `κ_{L_cap}(B)`; `κ_L` is nondecreasing in `L`.
pub fn kappa(b: &SparseMatrix, l_cap: usize) -> Result<KappaResult> {
    kappa_l(b, l_cap)
}

/// `A_{x,y,p}` for `p = 0..=l` given `e[λ] = (B^λ)_{x,y}` for `λ ≤ max part`.
pub fn composition_sums(e: &[f64], l: usize, kind: CompositionKind) -> Vec<f64> {
    let lam_min = match kind {
        CompositionKind::Weak => 0,
        CompositionKind::Strict => 1,
    };
    let lam_max = e.len().saturating_sub(1);
    // g[p] holds G_k(p) for the current k
    let mut g = vec![0.0; l + 1];
    g[0] = 1.0;
    let mut a = vec![0.0; l + 1];
    for k in 1..=l {
        let mut next = vec![0.0; l + 1];
        for p in 0..=l {
            let top = lam_max.min(p);
            let mut acc = 0.0;
            for lam in lam_min..=top {
                acc += e[lam] * g[p - lam];
            }
            next[p] = acc;
        }
        g = next;
        // k ≤ p
        for p in k..=l {
            a[p] += g[p];
        }
    }
    a
}

pub fn kappa_l_with(b: &SparseMatrix, l: usize, kind: CompositionKind) -> Result<KappaResult> {
    let depth = support_depth(b)?;
    kappa_l_with_cap(b, l, kind, depth, depth.part_cap())
}

/// `κ_L` with the part cap given explicitly (`None` for no cap); `depth` is
/// only recorded in the result.
pub fn kappa_l_with_cap(
    b: &SparseMatrix,
    l: usize,
    kind: CompositionKind,
    depth: SupportDepth,
    cap: Option<usize>,
) -> Result<KappaResult> {
    if l == 0 {
        return Err(Error::param("L must be at least 1"));
    }
    let lam_max = cap.map_or(l, |c| c.min(l));
    let n = b.n();

    let lam_min = match kind {
        CompositionKind::Weak => 0,
        CompositionKind::Strict => 1,
    };
    let per_column: Vec<Option<(f64, KappaArgmax)>> = (0..n)
        .into_par_iter()
        .map(|y| {
            let mut cols = vec![vec![0.0; n]; lam_max + 1];
            cols[0][y] = 1.0;
            for lam in 1..=lam_max {
                let (done, rest) = cols.split_at_mut(lam);
                b.mul_vec(&done[lam - 1], &mut rest[0]);
            }
            let mut best: Option<(f64, KappaArgmax)> = None;
            let mut e = vec![0.0; lam_max + 1];
            for x in 0..n {
                for (lam, c) in cols.iter().enumerate() {
                    e[lam] = c[x];
                }
                if e[lam_min..].iter().all(|&v| v == 0.0) {
                    continue;
                }
                let a = composition_sums(&e, l, kind);
                for (p, &ap) in a.iter().enumerate().skip(1) {
                    if ap <= 0.0 {
                        continue;
                    }
                    let v = ap.powf(1.0 / p as f64);
                    if best.is_none_or(|(bv, _)| v > bv) {
                        best = Some((v, KappaArgmax { p, x, y }));
                    }
                }
            }
            best
        })
        .collect();

    let mut best: Option<(f64, KappaArgmax)> = None;
    for (v, arg) in per_column.into_iter().flatten() {
        if best.is_none_or(|(bv, _)| v > bv) {
            best = Some((v, arg));
        }
    }
    Ok(KappaResult {
        kappa_l: best.map_or(0.0, |(v, _)| v),
        l,
        support_depth: depth,
        part_cap: cap,
        compositions: kind,
        argmax: best.map(|(_, a)| a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{birkhoff_mixture, sample_permutation, uniform};

    #[test]
    fn depth_exact_logs() {
        // n = 4096 = 4^6 with four nonzeros per row
        let t = (0..4096)
            .flat_map(|x| (0..4).map(move |k| (x, (x + k) % 4096, 0.25)))
            .collect();
        let b = SparseMatrix::from_triplets(4096, t).unwrap();
        match support_depth(&b).unwrap() {
            SupportDepth::Finite(v) => assert!((v - 1.0).abs() < 1e-12),
            SupportDepth::Unbounded => panic!("expected finite depth"),
        }
        assert_eq!(support_depth(&b).unwrap().part_cap(), Some(1));
    }

    #[test]
    fn depth_of_full_matrix_is_one_sixth() {
        let b = uniform(7).unwrap();
        match support_depth(&b).unwrap() {
            SupportDepth::Finite(v) => assert!((v - 1.0 / 6.0).abs() < 1e-12),
            SupportDepth::Unbounded => panic!("expected finite depth"),
        }
    }

    #[test]
    fn permutation_depth_unbounded() {
        let p = sample_permutation(9, 2).unwrap().to_matrix();
        assert_eq!(support_depth(&p).unwrap(), SupportDepth::Unbounded);
        assert!(support_depth(&SparseMatrix::identity(1)).is_err());
    }

    #[test]
    fn zero_matrix_has_zero_kappa() {
        for l in 1..6 {
            let k = kappa_l(&SparseMatrix::zeros(5), l).unwrap();
            assert_eq!(k.kappa_l, 0.0);
            assert!(k.argmax.is_none());
        }
    }

    #[test]
    fn identity_counts_weak_compositions() {
        // e_λ = 1 on the diagonal: A_p = Σ_{k ≤ p} C(p + k - 1, k - 1)
        let k = kappa_l(&SparseMatrix::identity(2), 3).unwrap();
        let a3: f64 = 1.0 + 4.0 + 10.0;
        let want = [1.0f64, (1.0f64 + 3.0).sqrt(), a3.cbrt()]
            .into_iter()
            .fold(0.0, f64::max);
        assert!((k.kappa_l - want).abs() < 1e-12);
        assert_eq!(k.argmax.unwrap().p, 3);
    }

    #[test]
    fn composition_sums_small_cases() {
        let a = composition_sums(&[0.0, 2.0, 3.0], 3, CompositionKind::Strict);
        // p=1: 2; p=2: 3 + 2·2 = 7; p=3: 2·3 + 3·2 + 2³ = 20
        assert_eq!(a, vec![0.0, 2.0, 7.0, 20.0]);
    }

    #[test]
    fn monotone_in_l_and_envelope() {
        let q = birkhoff_mixture(30, 2, 5).unwrap();
        let k4 = kappa(&q, 4).unwrap().kappa_l;
        let k8 = kappa(&q, 8).unwrap().kappa_l;
        assert!(k4 <= k8);
        assert!(k8 <= 4.0 + 1e-9);
    }

    #[test]
    fn zero_part_cap_gives_zero() {
        // d* = n: depth 1/6, cap 0, nothing survives for p >= 1
        let k = kappa_l(&uniform(8).unwrap(), 5).unwrap();
        assert_eq!(k.part_cap, Some(0));
        assert_eq!(k.kappa_l, 0.0);
    }
}

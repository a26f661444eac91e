//! The bound `ρ(ℓ₀) = max{N_{ℓ₀}, 2κ, δ*}`, the `ε` of the main estimate and
//! regime flags.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{second_eigmod, EigMethod};
use crate::kappa::{kappa, KappaResult};
use crate::matcore::{
    inf_norm_star, require_regular, rescale_for_convex, zero_one_norm_star, SparseMatrix,
    DEFAULT_TOL, DENSE_CAP,
};
use crate::moments::rho_ell;
use crate::quasitree::new_simulator;

/// Which quantity stands in for `‖(u + q)^{ℓ₀}‖^{1/ℓ₀}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    /// Deterministic `Φ(p^ℓ (p*)^ℓ)^{1/(2ℓ)}` from the moment recursion.
    #[default]
    TraceProxy,
    /// Power iteration on sampled quasi-trees.
    QuasiTree { trials: usize, iters: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    TraceProxy,
    Quasitree,
}

impl Estimator {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            Estimator::TraceProxy => EstimatorKind::TraceProxy,
            Estimator::QuasiTree { .. } => EstimatorKind::Quasitree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DominantTerm {
    Norm,
    Kappa,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub rho: f64,
    pub norm_proxy: f64,
    pub two_kappa: f64,
    pub delta_star: f64,
    pub ell0: usize,
    pub r: Option<f64>,
    pub dominant_term: DominantTerm,
    pub estimator_kind: EstimatorKind,
    pub kappa_cap: usize,
    pub kappa: KappaResult,
}

impl Certificate {
    fn assemble(
        norm_proxy: f64,
        two_kappa: f64,
        delta_star: f64,
        ell0: usize,
        r: Option<f64>,
        estimator_kind: EstimatorKind,
        kappa: KappaResult,
    ) -> Self {
        let (rho, dominant_term) = dominant(norm_proxy, two_kappa, delta_star);
        Certificate {
            rho,
            norm_proxy,
            two_kappa,
            delta_star,
            ell0,
            r,
            dominant_term,
            estimator_kind,
            kappa_cap: kappa.l,
            kappa,
        }
    }
}

/// Maximum of the three terms with ties going to norm, then kappa.
pub fn dominant(norm: f64, two_kappa: f64, delta: f64) -> (f64, DominantTerm) {
    if norm >= two_kappa && norm >= delta {
        (norm, DominantTerm::Norm)
    } else if two_kappa >= delta {
        (two_kappa, DominantTerm::Kappa)
    } else {
        (delta, DominantTerm::Delta)
    }
}

fn norm_term(q: &SparseMatrix, ell0: usize, estimator: Estimator) -> Result<f64> {
    match estimator {
        Estimator::TraceProxy => rho_ell(q, ell0),
        Estimator::QuasiTree { trials, iters, seed } => {
            Ok(new_simulator(q, seed)?.estimate_norm_power(ell0, trials, iters)?.estimate)
        }
    }
}

fn check_args(ell0: usize, kappa_cap: usize) -> Result<()> {
    if ell0 == 0 {
        return Err(Error::param("ell0 must be at least 1"));
    }
    if kappa_cap == 0 {
        return Err(Error::param("kappa cap must be at least 1"));
    }
    Ok(())
}

pub fn certify(
    q: &SparseMatrix,
    ell0: usize,
    kappa_cap: usize,
    estimator: Estimator,
) -> Result<Certificate> {
    check_args(ell0, kappa_cap)?;
    require_regular(q, DEFAULT_TOL)?;
    let norm = norm_term(q, ell0, estimator)?;
    let k = kappa(q, kappa_cap)?;
    Ok(Certificate::assemble(
        norm,
        2.0 * k.kappa_l,
        inf_norm_star(q),
        ell0,
        None,
        estimator.kind(),
        k,
    ))
}

/// Certificate for `(1 - r) M + r Q`. The norm term is `(1 - r)` times the
/// norm term of `Q' = r/(1-r) Q`; `κ` and `δ*` are scaled by `r`.
pub fn certify_convex(
    q: &SparseMatrix,
    r: f64,
    ell0: usize,
    kappa_cap: usize,
    estimator: Estimator,
) -> Result<Certificate> {
    check_args(ell0, kappa_cap)?;
    require_regular(q, DEFAULT_TOL)?;
    if !(0.0..1.0).contains(&r) {
        return Err(Error::param(format!("mixing weight r = {r} outside [0, 1)")));
    }
    // r = 0 is the pure permutation, whose norm term is exactly 1
    let norm = if r == 0.0 {
        1.0
    } else {
        (1.0 - r) * norm_term(&rescale_for_convex(q, r)?, ell0, estimator)?
    };
    let k = kappa(q, kappa_cap)?;
    Ok(Certificate::assemble(
        norm,
        2.0 * r * k.kappa_l,
        r * inf_norm_star(q),
        ell0,
        Some(r),
        estimator.kind(),
        k,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonParams {
    pub c0: f64,
    pub c1: f64,
    pub alpha: f64,
    pub n: f64,
    pub d_star: f64,
    pub epsilon: f64,
}

/// `ε = 12 c₁ ln d* / ((1 - c₀) (ln n)^α)`.
pub fn epsilon(n: f64, d_star: f64, c0: f64, c1: f64, alpha: f64) -> Result<EpsilonParams> {
    if !(c0 > 0.0 && c0 < 1.0) {
        return Err(Error::param(format!("c0 = {c0} must lie in (0, 1)")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(Error::param(format!("c1 = {c1} must be positive")));
    }
    if !(d_star >= 2.0 && d_star.is_finite()) {
        return Err(Error::param(format!("d* = {d_star} must be at least 2")));
    }
    if !(n >= 3.0 && n.is_finite()) {
        return Err(Error::param(format!("n = {n} must be at least 3")));
    }
    let epsilon = 12.0 * c1 * d_star.ln() / ((1.0 - c0) * n.ln().powf(alpha));
    Ok(EpsilonParams {
        c0,
        c1,
        alpha,
        n,
        d_star,
        epsilon,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeFlags {
    /// `d* ≤ exp(√ln n)`.
    pub sparsity_ok: bool,
    /// `‖Q‖ ≤ K`.
    pub norm_bounded: bool,
    /// `r < 1/(4δ + 1)`; absent without `r`.
    pub convex_small_r: Option<bool>,
    /// `r < 1/(8δ + 1)`, the range in which `2rκ ≤ 8rδ < 1 - r` follows from
    /// the envelope `κ ≤ 4δ`; absent without `r`.
    pub convex_envelope_ok: Option<bool>,
    /// `δ = 1` and `r < 1/5`; absent without `r`.
    pub bistochastic_fifth: Option<bool>,
    /// Second eigenvalue modulus of `Q` below `1/16`; absent above the dense cap.
    pub expander_ok: Option<bool>,
    pub d_star: usize,
    pub delta: f64,
    pub op_norm: f64,
    pub k: f64,
    pub q_second_eigmod: Option<f64>,
}

/// `‖Q‖₂` as the square root of the top eigenvalue of `QᵀQ`, by power
/// iteration from the all-ones vector.
pub fn operator_norm(q: &SparseMatrix) -> f64 {
    let n = q.n();
    if n == 0 {
        return 0.0;
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..10_000 {
        q.mul_vec(&x, &mut y);
        q.mul_vec_transpose(&y, &mut z);
        let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nz == 0.0 {
            return 0.0;
        }
        let next = nz.sqrt();
        x.iter_mut().zip(&z).for_each(|(a, b)| *a = b / nz);
        if (next - est).abs() <= 1e-13 * next {
            return next;
        }
        est = next;
    }
    est
}

pub fn classify_regime(q: &SparseMatrix, r: Option<f64>, k: Option<f64>) -> Result<RegimeFlags> {
    let n = q.n();
    if n < 2 {
        return Err(Error::param(format!("regime flags need n >= 2, got {n}")));
    }
    let d_star = zero_one_norm_star(q);
    let delta = q.row_sums().iter().sum::<f64>() / n as f64;
    let op_norm = operator_norm(q);
    let k = k.unwrap_or(op_norm);
    if !(k > 0.0) {
        return Err(Error::param(format!("K = {k} must be positive")));
    }
    let q_second_eigmod = if n <= DENSE_CAP {
        Some(second_eigmod(q, EigMethod::Dense, DEFAULT_TOL)?)
    } else {
        None
    };
    Ok(RegimeFlags {
        sparsity_ok: (d_star as f64) <= (n as f64).ln().sqrt().exp(),
        norm_bounded: op_norm <= k * (1.0 + 1e-9),
        convex_small_r: r.map(|r| r < 1.0 / (4.0 * delta + 1.0)),
        convex_envelope_ok: r.map(|r| r < 1.0 / (8.0 * delta + 1.0)),
        bistochastic_fifth: r.map(|r| (delta - 1.0).abs() <= DEFAULT_TOL && r < 0.2),
        expander_ok: q_second_eigmod.map(|l| l < 1.0 / 16.0),
        d_star,
        delta,
        op_norm,
        k,
        q_second_eigmod,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{birkhoff_mixture, random_perfect_matching, uniform};

    #[test]
    fn ties_prefer_norm_then_kappa() {
        assert_eq!(dominant(1.0, 1.0, 1.0).1, DominantTerm::Norm);
        assert_eq!(dominant(0.5, 1.0, 1.0).1, DominantTerm::Kappa);
        assert_eq!(dominant(0.5, 0.7, 1.0), (1.0, DominantTerm::Delta));
    }

    #[test]
    fn zero_matrix_certificate() {
        let c = certify(&SparseMatrix::zeros(6), 5, 5, Estimator::TraceProxy).unwrap();
        assert_eq!(c.rho, 1.0);
        assert_eq!(c.dominant_term, DominantTerm::Norm);
        assert_eq!(c.two_kappa, 0.0);
        assert_eq!(c.delta_star, 0.0);
    }

    #[test]
    fn rejects_irregular() {
        let q = SparseMatrix::from_dense(2, &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            certify(&q, 2, 2, Estimator::TraceProxy),
            Err(Error::NotRegular { .. })
        ));
    }

    #[test]
    fn bistochastic_delta_star_is_one() {
        let q = birkhoff_mixture(12, 3, 2).unwrap();
        let c = certify(&q, 3, 3, Estimator::TraceProxy).unwrap();
        assert!((c.delta_star - 1.0).abs() < 1e-12);
        let cc = certify_convex(&q, 0.999, 3, 3, Estimator::TraceProxy).unwrap();
        assert!((cc.delta_star - 0.999).abs() < 1e-12);
    }

    #[test]
    fn epsilon_exact_logs() {
        let e = epsilon(4f64.exp(), 1f64.exp(), 0.5, 1.0, 0.5).unwrap();
        assert!((e.epsilon - 12.0).abs() < 1e-12);
        assert!(epsilon(100.0, 1.0, 0.5, 1.0, 0.5).is_err());
        assert!(epsilon(100.0, 3.0, 1.0, 1.0, 0.5).is_err());
        assert!(epsilon(100.0, 3.0, 0.5, 0.0, 0.5).is_err());
        assert!(epsilon(2.0, 3.0, 0.5, 1.0, 0.5).is_err());
        let a = epsilon(100.0, 3.0, 0.5, 1.0, 0.5).unwrap().epsilon;
        let b = epsilon(200.0, 3.0, 0.5, 1.0, 0.5).unwrap().epsilon;
        assert!(b < a);
    }

    #[test]
    fn regime_examples() {
        // a circulant with five nonzeros per row at n = 100
        let t = (0..100)
            .flat_map(|x| (0..5).map(move |k| (x, (x + k) % 100, 0.2)))
            .collect();
        let q = SparseMatrix::from_triplets(100, t).unwrap();
        let f = classify_regime(&q, Some(0.1), None).unwrap();
        assert!(f.sparsity_ok);
        assert_eq!(f.convex_small_r, Some(true));
        assert_eq!(f.bistochastic_fifth, Some(true));
        assert!(f.norm_bounded);
        assert!((f.op_norm - 1.0).abs() < 1e-9);

        let j = classify_regime(&uniform(20).unwrap(), None, None).unwrap();
        assert_eq!(j.expander_ok, Some(true));
        assert_eq!(j.convex_small_r, None);
    }

    #[test]
    fn user_k_below_norm() {
        let q = random_perfect_matching(8, 1).unwrap();
        let f = classify_regime(&q, None, Some(0.5)).unwrap();
        assert!(!f.norm_bounded);
    }
}

use rayon::prelude::*;
use serde::Serialize;

use super::spectrum::{power_norm, second_eigmod, EigMethod, POWER_NORM_MAX_ELL, POWER_NORM_TOL};
use crate::certificate::{certify, certify_convex, epsilon, Certificate, EpsilonParams, Estimator};
use crate::error::{Error, Result};
use crate::matcore::{
    build_p, build_sum, require_regular, sample_permutation, zero_one_norm_star, SparseMatrix,
    DEFAULT_TOL,
};
use crate::rng::derive_seed;

pub const SCHEMA_VERSION: u32 = 1;

/// How the random permutation is combined with `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "r")]
pub enum Mixture {
    /// `P = M + Q`.
    Sum,
    /// `P = (1 - r) M + r Q`, `0 ≤ r < 1`.
    Convex(f64),
}

impl Mixture {
    pub fn r(&self) -> Option<f64> {
        match self {
            Mixture::Sum => None,
            Mixture::Convex(r) => Some(*r),
        }
    }
}

/// Parameters for the `ε`-inflated exceedance threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonConfig {
    pub c0: f64,
    pub c1: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub trials: usize,
    pub seed: u64,
    pub ell0: usize,
    pub kappa_cap: usize,
    pub method: EigMethod,
    pub tol: f64,
    pub estimator: Estimator,
    /// Also record the power-norm estimate per trial.
    pub with_power_norm: bool,
    pub epsilon: Option<EpsilonConfig>,
}

impl TrialConfig {
    pub fn new(trials: usize, seed: u64, ell0: usize) -> Self {
        TrialConfig {
            trials,
            seed,
            ell0,
            kappa_cap: ell0,
            method: EigMethod::Dense,
            tol: POWER_NORM_TOL,
            estimator: Estimator::TraceProxy,
            with_power_norm: false,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonExceedance {
    pub params: EpsilonParams,
    pub threshold: f64,
    pub exceed_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub schema_version: u32,
    pub trials: usize,
    pub n: usize,
    pub mixture: Mixture,
    pub r: Option<f64>,
    pub ell0: usize,
    pub rho: f64,
    pub method: EigMethod,
    /// Sorted ascending.
    pub lambda2_samples: Vec<f64>,
    pub exceed_count: usize,
    pub max_ratio: f64,
    pub seed: u64,
    pub epsilon: Option<EpsilonExceedance>,
    /// Sorted ascending; present when requested.
    pub power_norm_samples: Option<Vec<f64>>,
    pub certificate: Certificate,
}

impl TrialReport {
    /// Recomputes `exceed_count` and `max_ratio` from the samples.
    pub fn is_consistent(&self) -> bool {
        let count = self.lambda2_samples.iter().filter(|&&l| l > self.rho).count();
        let ratio = self
            .lambda2_samples
            .iter()
            .map(|l| l / self.rho)
            .fold(0.0, f64::max);
        count == self.exceed_count && ratio == self.max_ratio
    }
}

/// Seed of the permutation used by trial `t`.
pub fn trial_seed(seed: u64, t: usize) -> u64 {
    derive_seed(seed, t as u64)
}

/// The matrix `P` of trial `t`.
pub fn trial_matrix(q: &SparseMatrix, mixture: Mixture, seed: u64, t: usize) -> Result<SparseMatrix> {
    let m = sample_permutation(q.n(), trial_seed(seed, t))?;
    match mixture {
        Mixture::Sum => build_sum(&m, q),
        Mixture::Convex(r) => build_p(&m, q, r),
    }
}

pub fn run_trials(q: &SparseMatrix, mixture: Mixture, cfg: &TrialConfig) -> Result<TrialReport> {
    if cfg.trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    require_regular(q, DEFAULT_TOL)?;
    let certificate = match mixture {
        Mixture::Sum => certify(q, cfg.ell0, cfg.kappa_cap, cfg.estimator)?,
        Mixture::Convex(r) => certify_convex(q, r, cfg.ell0, cfg.kappa_cap, cfg.estimator)?,
    };
    let rho = certificate.rho;

    let samples: Vec<(f64, Option<f64>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, Option<f64>)> {
            let p = trial_matrix(q, mixture, cfg.seed, t)?;
            let l2 = second_eigmod(&p, cfg.method, cfg.tol)?;
            let pn = if cfg.with_power_norm {
                Some(power_norm(&p, cfg.tol, POWER_NORM_MAX_ELL)?.estimate)
            } else {
                None
            };
            Ok((l2, pn))
        })
        .collect::<Result<_>>()?;

    let mut lambda2_samples: Vec<f64> = samples.iter().map(|s| s.0).collect();
    lambda2_samples.sort_by(f64::total_cmp);
    let power_norm_samples = cfg.with_power_norm.then(|| {
        let mut v: Vec<f64> = samples.iter().filter_map(|s| s.1).collect();
        v.sort_by(f64::total_cmp);
        v
    });
    let exceed_count = lambda2_samples.iter().filter(|&&l| l > rho).count();
    let max_ratio = lambda2_samples.iter().map(|l| l / rho).fold(0.0, f64::max);

    let epsilon = match cfg.epsilon {
        Some(e) => {
            let params = epsilon(
                q.n() as f64,
                zero_one_norm_star(q) as f64,
                e.c0,
                e.c1,
                e.alpha,
            )?;
            let threshold = (1.0 + params.epsilon) * rho;
            Some(EpsilonExceedance {
                params,
                threshold,
                exceed_count: lambda2_samples.iter().filter(|&&l| l > threshold).count(),
            })
        }
        None => None,
    };

    Ok(TrialReport {
        schema_version: SCHEMA_VERSION,
        trials: cfg.trials,
        n: q.n(),
        mixture,
        r: mixture.r(),
        ell0: cfg.ell0,
        rho,
        method: cfg.method,
        lambda2_samples,
        exceed_count,
        max_ratio,
        seed: cfg.seed,
        epsilon,
        power_norm_samples,
        certificate,
    })
}

/// `max(1, round((1 - c₀) ln n / (6 ln d*)))`.
pub fn default_ell(n: f64, d_star: f64, c0: f64) -> Result<usize> {
    if !(d_star >= 2.0 && d_star.is_finite()) {
        return Err(Error::param(format!("d* = {d_star} must be at least 2")));
    }
    if !(n >= 3.0 && n.is_finite()) {
        return Err(Error::param(format!("n = {n} must be at least 3")));
    }
    if !(0.0..1.0).contains(&c0) {
        return Err(Error::param(format!("c0 = {c0} must lie in [0, 1)")));
    }
    let v = ((1.0 - c0) * n.ln() / (6.0 * d_star.ln())).round();
    Ok((v as usize).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::birkhoff_mixture;

    #[test]
    fn pure_permutation_has_unit_modulus() {
        let q = birkhoff_mixture(8, 2, 1).unwrap();
        let rep = run_trials(&q, Mixture::Convex(0.0), &TrialConfig::new(6, 3, 2)).unwrap();
        assert_eq!(rep.rho, 1.0);
        for l in &rep.lambda2_samples {
            assert!((l - 1.0).abs() < 1e-9, "{l}");
        }
        assert!(rep.is_consistent());
    }

    #[test]
    fn zero_trials_rejected() {
        let q = birkhoff_mixture(8, 2, 1).unwrap();
        assert!(run_trials(&q, Mixture::Sum, &TrialConfig::new(0, 3, 2)).is_err());
    }

    #[test]
    fn default_ell_examples() {
        assert_eq!(default_ell(12f64.exp(), 2f64.exp(), 0.0).unwrap(), 1);
        assert_eq!(default_ell(600.0, 2.0, 0.5).unwrap(), 1);
        assert_eq!(default_ell(1e12, 2.0, 0.0).unwrap(), 7);
        assert!(default_ell(600.0, 1.0, 0.5).is_err());
        let mut prev = usize::MAX;
        for d in 2..40 {
            let v = default_ell(1e9, d as f64, 0.1).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn epsilon_threshold_reported() {
        let q = birkhoff_mixture(10, 2, 1).unwrap();
        let mut cfg = TrialConfig::new(3, 3, 2);
        cfg.epsilon = Some(EpsilonConfig {
            c0: 0.5,
            c1: 1.0,
            alpha: 0.5,
        });
        let rep = run_trials(&q, Mixture::Convex(0.1), &cfg).unwrap();
        let e = rep.epsilon.unwrap();
        assert!(e.threshold > rep.rho);
        assert!(e.exceed_count <= rep.exceed_count);
    }
}

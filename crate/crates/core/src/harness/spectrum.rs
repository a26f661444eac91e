use std::cmp::Ordering;
use std::io::Write;

use faer::Mat;
use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{SparseMatrix, DENSE_CAP};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigMethod {
    /// Full nonsymmetric spectrum.
    #[default]
    Dense,
    /// `‖(ΠPΠ)^ℓ‖^{1/ℓ}` for doubling `ℓ`.
    PowerNorm,
}

/// Default relative tolerance on successive `‖(ΠPΠ)^ℓ‖^{1/ℓ}` values.
pub const POWER_NORM_TOL: f64 = 1e-2;

/// Largest `ℓ` tried by the power-norm estimator.
pub const POWER_NORM_MAX_ELL: usize = 1 << 12;

/// Eigenvalues of `P` with one eigenvalue nearest the mean row sum removed,
/// as `(re, im)` pairs sorted by decreasing modulus, then by `re` and `im`.
pub fn restricted_spectrum(p: &SparseMatrix) -> Result<Vec<(f64, f64)>> {
    let n = p.n();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if n > DENSE_CAP {
        return Err(Error::DenseCapExceeded { n, cap: DENSE_CAP });
    }
    let dense = p.to_dense();
    let m = Mat::<f64>::from_fn(n, n, |i, j| dense[i * n + j]);
    let ev = m
        .eigenvalues()
        .map_err(|e| Error::Convergence {
            message: format!("dense eigenvalue solver failed: {e:?}"),
            best: f64::NAN,
        })?;
    let mut ev: Vec<(f64, f64)> = ev.iter().map(|z| (z.re, z.im)).collect();
    let top = p.row_sums().iter().sum::<f64>() / n as f64;
    let drop = ev
        .iter()
        .enumerate()
        .min_by(|a, b| dist(*a.1, top).total_cmp(&dist(*b.1, top)))
        .map(|(i, _)| i)
        .expect("n >= 1");
    ev.swap_remove(drop);
    ev.sort_by(|a, b| {
        modulus(*b)
            .total_cmp(&modulus(*a))
            .then(a.0.total_cmp(&b.0))
            .then(a.1.total_cmp(&b.1))
    });
    Ok(ev)
}

fn dist(z: (f64, f64), top: f64) -> f64 {
    (z.0 - top).hypot(z.1)
}

pub fn modulus(z: (f64, f64)) -> f64 {
    z.0.hypot(z.1)
}

/// `|λ₂(P)|`: the largest modulus after removing the Perron eigenvalue
/// (dense), or the norm-of-powers proxy restricted to `𝟏⊥` (power_norm).
pub fn second_eigmod(p: &SparseMatrix, method: EigMethod, tol: f64) -> Result<f64> {
    match method {
        EigMethod::Dense => Ok(restricted_spectrum(p)?
            .first()
            .map_or(0.0, |&z| modulus(z))),
        EigMethod::PowerNorm => Ok(power_norm(p, tol, POWER_NORM_MAX_ELL)?.estimate),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerNormEstimate {
    pub estimate: f64,
    pub ell: usize,
}

fn center(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Applies `(ΠAΠ)^ℓ` (or its transpose) to a unit vector, renormalizing at
/// every step. Returns `ln ‖(ΠAΠ)^ℓ x‖` and leaves the direction in `x`.
fn apply_power(p: &SparseMatrix, x: &mut Vec<f64>, ell: usize, transpose: bool) -> f64 {
    let mut y = vec![0.0; x.len()];
    let mut log_scale = 0.0;
    for _ in 0..ell {
        center(x);
        if transpose {
            p.mul_vec_transpose(x, &mut y);
        } else {
            p.mul_vec(x, &mut y);
        }
        center(&mut y);
        let s = norm(&y);
        if s == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return f64::NEG_INFINITY;
        }
        y.iter_mut().for_each(|v| *v /= s);
        log_scale += s.ln();
        std::mem::swap(x, &mut y);
    }
    log_scale
}

/// `‖(ΠAΠ)^ℓ‖^{1/ℓ}` by power iteration on `BᵀB`, `B = (ΠAΠ)^ℓ`.
fn norm_of_power(p: &SparseMatrix, ell: usize, start: &[f64]) -> f64 {
    let mut x = start.to_vec();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..200 {
        let s = norm(&x);
        if s == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= s);
        let log_fwd = apply_power(p, &mut x, ell, false);
        if log_fwd == f64::NEG_INFINITY {
            return 0.0;
        }
        let prev = best;
        best = best.max(log_fwd);
        apply_power(p, &mut x, ell, true);
        if (best - prev).abs() <= 1e-10 * ell as f64 {
            break;
        }
    }
    (best / ell as f64).exp()
}

/// Doubles `ℓ` until `‖(ΠPΠ)^ℓ‖^{1/ℓ}` changes by at most `tol` relative to
/// the previous value.
pub fn power_norm(p: &SparseMatrix, tol: f64, max_ell: usize) -> Result<PowerNormEstimate> {
    let n = p.n();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance {tol} must be positive")));
    }
    if n == 1 {
        return Ok(PowerNormEstimate { estimate: 0.0, ell: 1 });
    }
    let mut rng = rng_from_seed(0x5eed);
    let start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut ell = 1;
    let mut prev = norm_of_power(p, ell, &start);
    while ell < max_ell {
        ell *= 2;
        let cur = norm_of_power(p, ell, &start);
        if cur == 0.0 || (cur - prev).abs() <= tol * cur {
            return Ok(PowerNormEstimate { estimate: cur, ell });
        }
        prev = cur;
    }
    Err(Error::Convergence {
        message: format!("norm of powers did not stabilize by ell = {ell}"),
        best: prev,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumDump {
    pub n: usize,
    pub eigenvalues: Vec<(f64, f64)>,
    pub circle_radius: f64,
    pub max_modulus: f64,
}

impl SpectrumDump {
    /// CSV with header `re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "re,im")?;
        for (re, im) in &self.eigenvalues {
            writeln!(w, "{re:?},{im:?}")?;
        }
        Ok(())
    }
}

pub fn dump_spectrum(p: &SparseMatrix, circle_radius: f64) -> Result<SpectrumDump> {
    let eigenvalues = restricted_spectrum(p)?;
    let max_modulus = eigenvalues
        .iter()
        .map(|&z| modulus(z))
        .max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        .unwrap_or(0.0);
    Ok(SpectrumDump {
        n: p.n(),
        eigenvalues,
        circle_radius,
        max_modulus,
    })
}

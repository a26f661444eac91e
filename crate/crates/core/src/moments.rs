//! Mixed traces of `Q` and the moments `Φ(p^ℓ₁ (p*)^ℓ₂)` of `p = u + q`.
//!
//! The moment of `p^ℓ₁ (p*)^ℓ₂` is a sum over pairs of compositions with the
//! same number of parts `T`,
//!
//! ```text
//! F(ℓ₁, ℓ₂) = Σ_T Σ_{ℓ⃗ ∈ L(T, ℓ₁), ℓ⃗' ∈ L(T, ℓ₂)} Π_t τ(ℓ_t, ℓ'_t),
//! ```
//!
//! where `L(T, ℓ)` holds the tuples `(ℓ_1, …, ℓ_T) ≥ 0` with
//! `Σ ℓ_t + T - 1 = ℓ` and `τ(a, b) = Tr_N(Q^a (Qᵀ)^b)`. Peeling off the first
//! part of both compositions gives
//!
//! ```text
//! F(m, n) = τ(m, n) + Σ_{a<m} Σ_{b<n} τ(a, b) F(m - a - 1, n - b - 1),
//! ```
//!
//! which [`phi_moment_table`] evaluates in `O(L⁴)` time.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{rescale_for_convex, SparseMatrix};

/// Default bound on the magnitude of entries of `Q^a` before
/// [`trace_table`] gives up with a range error.
pub const DEFAULT_MAGNITUDE_CAP: f64 = 1e150;

/// `τ(a, b) = Tr_N(Q^a (Qᵀ)^b)` for `0 ≤ a, b ≤ l_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceTable {
    pub n: usize,
    pub l_max: usize,
    tau: Vec<Vec<f64>>,
}

impl TraceTable {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.tau[a][b]
    }

    /// Builds a table from explicit values; `tau` must be square with side
    /// `l_max + 1`.
    pub fn from_values(n: usize, tau: Vec<Vec<f64>>) -> Result<Self> {
        let side = tau.len();
        if side == 0 || tau.iter().any(|row| row.len() != side) {
            return Err(Error::param("trace table must be a non-empty square array"));
        }
        Ok(TraceTable {
            n,
            l_max: side - 1,
            tau,
        })
    }
}

pub fn trace_table(q: &SparseMatrix, l_max: usize) -> Result<TraceTable> {
    trace_table_with_cap(q, l_max, DEFAULT_MAGNITUDE_CAP)
}

/// Computes `τ(a, b) = (1/n) ⟨Q^a, Q^b⟩_F` column by column: for each basis
/// vector `e_x` the sequence `Q^a e_x` is built once and all pairwise inner
/// products are accumulated. Columns are processed in parallel and reduced
/// in index order, so the result does not depend on the thread count.
pub fn trace_table_with_cap(q: &SparseMatrix, l_max: usize, cap: f64) -> Result<TraceTable> {
    let n = q.n();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let side = l_max + 1;
    let tri = side * (side + 1) / 2;

    let partials: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|x| -> Result<Vec<f64>> {
            let mut cols = vec![vec![0.0; n]; side];
            cols[0][x] = 1.0;
            for a in 1..side {
                let (done, rest) = cols.split_at_mut(a);
                q.mul_vec(&done[a - 1], &mut rest[0]);
                let peak = rest[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if !(peak <= cap) {
                    return Err(Error::Range(format!(
                        "entry of Q^{a} reached {peak:e}, above the cap {cap:e}"
                    )));
                }
            }
            let mut out = Vec::with_capacity(tri);
            for a in 0..side {
                for b in a..side {
                    out.push(cols[a].iter().zip(&cols[b]).map(|(u, v)| u * v).sum());
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut sums = vec![0.0; tri];
    for p in &partials {
        for (s, v) in sums.iter_mut().zip(p) {
            *s += v;
        }
    }
    let mut tau = vec![vec![0.0; side]; side];
    let mut k = 0;
    for a in 0..side {
        for b in a..side {
            let v = sums[k] / n as f64;
            tau[a][b] = v;
            tau[b][a] = v;
            k += 1;
        }
    }
    Ok(TraceTable { n, l_max, tau })
}

/// `F[ℓ₁][ℓ₂] = Φ(p^ℓ₁ (p*)^ℓ₂)` for `0 ≤ ℓ₁, ℓ₂ ≤ l_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub l_max: usize,
    f: Vec<Vec<f64>>,
}

impl MomentTable {
    pub fn get(&self, l1: usize, l2: usize) -> f64 {
        self.f[l1][l2]
    }

    /// `ρ_{ℓ₁,ℓ₂} = F(ℓ₁, ℓ₂)^{1/(ℓ₁+ℓ₂)}`; undefined for `ℓ₁ = ℓ₂ = 0`.
    pub fn rho_pair(&self, l1: usize, l2: usize) -> Option<f64> {
        (l1 + l2 > 0).then(|| self.f[l1][l2].powf(1.0 / (l1 + l2) as f64))
    }

    /// `ρ_ℓ = F(ℓ, ℓ)^{1/(2ℓ)}`.
    pub fn rho(&self, ell: usize) -> Option<f64> {
        self.rho_pair(ell, ell)
    }

    /// CSV with header `l1,l2,phi`, rows in `(l1, l2)` lexicographic order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "l1,l2,phi")?;
        for (l1, row) in self.f.iter().enumerate() {
            for (l2, v) in row.iter().enumerate() {
                writeln!(w, "{l1},{l2},{v:?}")?;
            }
        }
        Ok(())
    }
}

pub fn phi_moment_table(tau: &TraceTable, l_max: usize) -> Result<MomentTable> {
    if l_max > tau.l_max {
        return Err(Error::param(format!(
            "moment order {l_max} exceeds trace table order {}",
            tau.l_max
        )));
    }
    let side = l_max + 1;
    let mut f = vec![vec![0.0; side]; side];
    for m in 0..side {
        for n in 0..side {
            let mut acc = tau.get(m, n);
            for a in 0..m {
                for b in 0..n {
                    acc += tau.get(a, b) * f[m - a - 1][n - b - 1];
                }
            }
            f[m][n] = acc;
        }
    }
    Ok(MomentTable { l_max, f })
}

/// Trace proxy `ρ_ℓ = Φ(p^ℓ (p*)^ℓ)^{1/(2ℓ)}` for `p = u + Π_N(Q)`.
pub fn rho_ell(q: &SparseMatrix, ell: usize) -> Result<f64> {
    if ell == 0 {
        return Err(Error::param("ell must be at least 1"));
    }
    let tau = trace_table(q, ell)?;
    let f = phi_moment_table(&tau, ell)?;
    Ok(f.rho(ell).expect("ell >= 1"))
}

/// Trace proxy for `(1 - r) u + r q`, computed as `(1 - r) ρ_ℓ(Q')` with
/// `Q' = r/(1-r) Q`.
pub fn rho_ell_convex(q: &SparseMatrix, r: f64, ell: usize) -> Result<f64> {
    let qp = rescale_for_convex(q, r)?;
    Ok((1.0 - r) * rho_ell(&qp, ell)?)
}

//! Brute-force enumeration against the dynamic programs.

use freegap::kappa::{composition_sums, kappa_l_with, support_depth, CompositionKind};
use freegap::matcore::{sample_permutation, SparseMatrix};
use freegap::moments::{phi_moment_table, trace_table, TraceTable};
use freegap::rng::rng_from_seed;
use rand::Rng;

/// All compositions of `total` into exactly `parts` parts in `[lo, hi]`.
fn compositions(total: usize, parts: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in lo..=total.min(hi) {
        for mut rest in compositions(total - first, parts - 1, lo, hi) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[test]
fn composition_sums_match_enumeration() {
    let mut rng = rng_from_seed(3);
    for _ in 0..200 {
        let max_part = rng.random_range(0..5);
        let e: Vec<f64> = (0..=max_part).map(|_| rng.random_range(0..4) as f64).collect();
        let l = rng.random_range(1..7);
        for (kind, lo) in [(CompositionKind::Weak, 0), (CompositionKind::Strict, 1)] {
            let dp = composition_sums(&e, l, kind);
            for p in 1..=l {
                let brute: f64 = (1..=p)
                    .flat_map(|k| compositions(p, k, lo, max_part))
                    .map(|c| c.iter().map(|&lam| e[lam]).product::<f64>())
                    .sum();
                assert_eq!(dp[p], brute, "e={e:?} p={p} kind={kind:?}");
            }
        }
    }
}

#[test]
fn strict_compositions_count_is_power_of_two() {
    // with e ≡ 1, strict compositions of p number 2^(p-1)
    let a = composition_sums(&[1.0; 9], 8, CompositionKind::Strict);
    for p in 1..=8 {
        assert_eq!(a[p], (1u64 << (p - 1)) as f64);
    }
}

fn integer_regular(n: usize, k: usize, seed: u64) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..k {
        let p = sample_permutation(n, seed * 17 + i as u64).unwrap();
        t.extend(p.as_slice().iter().enumerate().map(|(x, &y)| (x, y, 1.0)));
    }
    SparseMatrix::from_triplets(n, t).unwrap()
}

fn dense_powers(q: &SparseMatrix, max: usize) -> Vec<Vec<f64>> {
    let n = q.n();
    let mut out = vec![SparseMatrix::identity(n).to_dense()];
    let mut cur = SparseMatrix::identity(n);
    for _ in 0..max {
        cur = cur.matmul(q).unwrap();
        out.push(cur.to_dense());
    }
    out
}

#[test]
fn strict_kappa_matches_enumeration() {
    for s in 0..10u64 {
        let n = 2 + s as usize % 4;
        let q = integer_regular(n, 1 + s as usize % 2, s);
        let cap = support_depth(&q).unwrap().part_cap();
        let pw = dense_powers(&q, 4);
        for l in 1..=4 {
            let dp = kappa_l_with(&q, l, CompositionKind::Strict).unwrap().kappa_l;
            let mut best = 0.0f64;
            for x in 0..n {
                for y in 0..n {
                    for p in 1..=l {
                        let a: f64 = (1..=p)
                            .flat_map(|k| compositions(p, k, 1, cap.unwrap_or(p)))
                            .map(|c| c.iter().map(|&lam| pw[lam][x * n + y]).product::<f64>())
                            .sum();
                        if a > 0.0 {
                            best = best.max(a.powf(1.0 / p as f64));
                        }
                    }
                }
            }
            assert_eq!(dp, best, "n={n} L={l}");
        }
    }
}

#[test]
fn moments_from_synthetic_trace_table() {
    // arbitrary symmetric τ exercises the recursion independently of Q
    let mut rng = rng_from_seed(11);
    let side = 6;
    let mut tau = vec![vec![0.0; side]; side];
    for a in 0..side {
        for b in a..side {
            let v = if a == 0 && b == 0 { 1.0 } else { rng.random_range(0.0..1.0) };
            tau[a][b] = v;
            tau[b][a] = v;
        }
    }
    let table = TraceTable::from_values(3, tau.clone()).unwrap();
    let f = phi_moment_table(&table, 5).unwrap();
    for l1 in 0..side {
        for l2 in 0..side {
            let mut want = 0.0;
            for t in 1..=(l1.min(l2) + 1) {
                for c1 in compositions(l1 + 1 - t, t, 0, usize::MAX) {
                    for c2 in compositions(l2 + 1 - t, t, 0, usize::MAX) {
                        want += c1.iter().zip(&c2).map(|(&a, &b)| tau[a][b]).product::<f64>();
                    }
                }
            }
            assert!((f.get(l1, l2) - want).abs() <= 1e-12 * want.max(1.0), "({l1},{l2})");
        }
    }
}

#[test]
fn trace_table_matches_dense_traces() {
    let q = integer_regular(6, 2, 5).scaled(0.5).unwrap();
    let t = trace_table(&q, 4).unwrap();
    let n = 6;
    let pw = dense_powers(&q, 4);
    for a in 0..=4 {
        for b in 0..=4 {
            // Tr(Q^a (Qᵀ)^b) = Σ_{ij} (Q^a)_{ij} (Q^b)_{ij}
            let want: f64 = (0..n * n).map(|k| pw[a][k] * pw[b][k]).sum::<f64>() / n as f64;
            assert!((t.get(a, b) - want).abs() < 1e-14);
        }
    }
}

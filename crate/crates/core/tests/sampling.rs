//! Goodness of fit of the permutation sampler.

use std::collections::HashMap;

use freegap::matcore::sample_permutation;
use freegap::rng::derive_seed;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_uniform(n: usize, samples: usize, seed: u64) -> (f64, f64) {
    let classes: usize = (1..=n).product();
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for i in 0..samples {
        let p = sample_permutation(n, derive_seed(seed, i as u64)).unwrap();
        *counts.entry(p.as_slice().to_vec()).or_insert(0) += 1;
    }
    assert_eq!(counts.len(), classes, "some permutation of size {n} never appeared");
    let expected = samples as f64 / classes as f64;
    let stat = counts
        .values()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let critical = ChiSquared::new((classes - 1) as f64)
        .unwrap()
        .inverse_cdf(1.0 - 0.001);
    (stat, critical)
}

#[test]
fn s3_is_uniform() {
    let (stat, critical) = chi_square_uniform(3, 60_000, 1);
    assert!(stat < critical, "chi-square {stat} >= {critical}");
}

#[test]
fn small_symmetric_groups_are_uniform() {
    assert_eq!(sample_permutation(1, 5).unwrap().as_slice(), &[0]);
    for n in 2..=4usize {
        let samples = 10_000 * (1..=n).product::<usize>();
        let (stat, critical) = chi_square_uniform(n, samples, 100 + n as u64);
        assert!(stat < critical, "n={n}: chi-square {stat} >= {critical}");
    }
}

#[test]
fn same_seed_same_permutation() {
    assert_eq!(
        sample_permutation(50, 9).unwrap(),
        sample_permutation(50, 9).unwrap()
    );
    assert_ne!(
        sample_permutation(50, 9).unwrap(),
        sample_permutation(50, 10).unwrap()
    );
}

use std::collections::BTreeMap;

use expsum::omega_models::{
    sample_omega, sample_omega_with, size_distribution, ModelKind, OmegaModel,
};
use expsum::parallel::Execution;
use expsum::seed::SeedStream;
use num_bigint::BigInt;
use num_rational::BigRational;

/// Distribution of the number of distinct values over all N^n tuples.
fn occupancy_by_enumeration(modulus: usize, n: usize) -> Vec<BigRational> {
    let mut counts = vec![0i64; modulus + 1];
    let total = modulus.pow(n as u32);
    for code in 0..total {
        let mut seen = 0u32;
        let mut c = code;
        for _ in 0..n {
            seen |= 1 << (c % modulus);
            c /= modulus;
        }
        counts[seen.count_ones() as usize] += 1;
    }
    counts
        .into_iter()
        .map(|c| BigRational::new(BigInt::from(c), BigInt::from(total)))
        .collect()
}

fn histogram(model: &OmegaModel, trials: usize, seed: u64) -> Vec<usize> {
    let stream = SeedStream::new(seed, "histogram");
    let sizes = Execution::default().map(trials, |i| {
        sample_omega_with(model, &mut stream.rng(i as u64))
            .omega
            .len()
    });
    let mut h = vec![0; model.modulus + 1];
    for s in sizes {
        h[s] += 1;
    }
    h
}

fn assert_matches(model: &OmegaModel, trials: usize, seed: u64) {
    let exact = size_distribution(model).probabilities;
    let h = histogram(model, trials, seed);
    // adjacent sizes are pooled until each group expects at least 10 hits
    let mut groups: Vec<(usize, f64, usize)> = Vec::new();
    let mut open = (0, 0.0, 0);
    for (k, (&count, &p)) in h.iter().zip(&exact).enumerate() {
        open = (open.0, open.1 + p, open.2 + count);
        if open.1 * trials as f64 >= 10.0 {
            groups.push(open);
            open = (k + 1, 0.0, 0);
        }
    }
    match groups.last_mut() {
        Some(last) => {
            last.1 += open.1;
            last.2 += open.2;
        }
        None => groups.push(open),
    }
    for (start, p, count) in groups {
        let emp = count as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            (emp - p).abs() <= 4.0 * sigma + 1e-12,
            "{model:?} group from k={start}: {emp} vs {p}"
        );
    }
}

#[test]
fn occupancy_law_matches_enumeration() {
    for modulus in 2..=6 {
        for n in 1..=6 {
            let model = OmegaModel::new(ModelKind::OccupationRange { n }, modulus).unwrap();
            let exact = size_distribution(&model).exact.expect("exact masses");
            assert_eq!(
                exact,
                occupancy_by_enumeration(modulus, n),
                "N={modulus} n={n}"
            );
        }
    }
}

#[test]
fn histograms_match_exact_laws() {
    let n = 31;
    let kinds = [
        ModelKind::OccupationRange { n: 20 },
        ModelKind::BernoulliSelection { tau: 0.4 },
        ModelKind::PoissonProcess { tau: 0.4 },
        ModelKind::UniformSubset { f: 12 },
    ];
    for kind in kinds {
        assert_matches(&OmegaModel::new(kind, n).unwrap(), 20_000, 3);
    }
}

#[test]
fn bernoulli_inclusion_frequency() {
    let model = OmegaModel::new(ModelKind::BernoulliSelection { tau: 0.5 }, 11).unwrap();
    let trials = 20_000;
    let mut hits = [0usize; 11];
    for i in 0..trials {
        for w in sample_omega(&model, i).omega {
            hits[w] += 1;
        }
    }
    for (w, &h) in hits.iter().enumerate() {
        let freq = h as f64 / trials as f64;
        assert!(
            (freq - 0.5).abs() <= 4.0 * (0.25 / trials as f64).sqrt(),
            "ω={w}: {freq}"
        );
    }
}

#[test]
fn subsets_are_uniform_given_their_size() {
    // χ² over the 35 three-element subsets of Z_7; 75 exceeds the 0.9999
    // quantile with 34 degrees of freedom.
    for kind in [
        ModelKind::BernoulliSelection { tau: 0.4 },
        ModelKind::OccupationRange { n: 4 },
        ModelKind::PoissonProcess { tau: 0.4 },
    ] {
        let model = OmegaModel::new(kind, 7).unwrap();
        let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let stream = SeedStream::new(21, "chi-square");
        for i in 0..60_000u64 {
            let omega = sample_omega_with(&model, &mut stream.rng(i)).omega;
            if omega.len() == 3 {
                *counts.entry(omega).or_default() += 1;
            }
        }
        assert_eq!(counts.len(), 35);
        let total: usize = counts.values().sum();
        let expected = total as f64 / 35.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 75.0, "{kind:?}: χ² = {chi2}");
    }
}

#[test]
fn occupancy_draws_are_exchangeable() {
    // each position of the tuple is uniform, and position pairs are independent
    let model = OmegaModel::new(ModelKind::OccupationRange { n: 3 }, 5).unwrap();
    let trials = 25_000;
    let mut first = [0usize; 5];
    let mut last = [0usize; 5];
    let mut equal_pairs = 0;
    for i in 0..trials {
        let draw = sample_omega(&model, i as u64).draw.unwrap();
        let p = draw.points();
        first[p[0]] += 1;
        last[p[2]] += 1;
        equal_pairs += (p[0] == p[2]) as usize;
    }
    let sigma = (0.2 * 0.8 / trials as f64).sqrt();
    for w in 0..5 {
        assert!((first[w] as f64 / trials as f64 - 0.2).abs() <= 4.0 * sigma);
        assert!((last[w] as f64 / trials as f64 - 0.2).abs() <= 4.0 * sigma);
    }
    assert!((equal_pairs as f64 / trials as f64 - 0.2).abs() <= 4.0 * sigma);
}

#[test]
fn same_seed_same_sample() {
    let model = OmegaModel::new(ModelKind::PoissonProcess { tau: 0.3 }, 97).unwrap();
    assert_eq!(sample_omega(&model, 5), sample_omega(&model, 5));
}

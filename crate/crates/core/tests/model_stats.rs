mod common;

use common::{params, sigma_band};
use lrp_core::model::{edge_probability, length_cdf, sample_continuous, sample_discrete};
use lrp_core::stats::{chi_square_independence, ks_one_sample, poisson_gof};
use lrp_core::DiscreteParams;

#[test]
fn discrete_class_frequencies_match_edge_probability() {
    let (n, beta, reps) = (200usize, 1.0, 2000usize);
    let mut by_class = vec![0u64; 11];
    for seed in 0..reps as u64 {
        let g = sample_discrete(&DiscreteParams::new(n, beta, seed)).unwrap();
        for &(a, b) in g.long_edges() {
            if b - a <= 10 {
                by_class[b - a] += 1;
            }
        }
    }
    for r in 2..=10 {
        let p = edge_probability(beta, 2.0, r as u64).unwrap();
        let trials = ((n + 1 - r) * reps) as f64;
        let freq = by_class[r] as f64 / trials;
        let tol = 3.0 * (p * (1.0 - p) / trials).sqrt();
        assert!((freq - p).abs() <= tol, "r={r}: {freq} vs {p}");
    }
}

#[test]
fn discrete_total_count_mean() {
    let reps = 3000;
    let p = DiscreteParams::new(500, 0.7, 0);
    let counts: Vec<f64> = (0..reps)
        .map(|seed| sample_discrete(&DiscreteParams { seed, ..p }).unwrap().long_edge_count() as f64)
        .collect();
    let expected = p.expected_long_edges();
    let var: f64 = (2..=500u64)
        .map(|r| {
            let q = edge_probability(0.7, 2.0, r).unwrap();
            (501 - r) as f64 * q * (1.0 - q)
        })
        .sum();
    let mean = lrp_core::stats::mean(&counts);
    assert!((mean - expected).abs() <= sigma_band(var, reps as usize, 3.0), "{mean} vs {expected}");
}

#[test]
fn discrete_pairs_independent() {
    let mut table = vec![vec![0u64; 2]; 2];
    for seed in 0..4000 {
        let g = sample_discrete(&DiscreteParams::new(6, 1.0, seed)).unwrap();
        table[g.has_edge(0, 2) as usize][g.has_edge(1, 3) as usize] += 1;
    }
    assert!(chi_square_independence(&table).unwrap().passes(0.01));
}

#[test]
fn non_quadratic_exponent() {
    let reps = 400usize;
    let mut hits = 0u64;
    for seed in 0..reps as u64 {
        let g = sample_discrete(&DiscreteParams::new(100, 2.0, seed).with_exponent(3.0)).unwrap();
        hits += g.long_edges().iter().filter(|&&(a, b)| b - a == 3).count() as u64;
    }
    let p = 2.0 / 27.0;
    let trials = (98 * reps) as f64;
    let freq = hits as f64 / trials;
    assert!((freq - p).abs() <= 3.0 * (p * (1.0 - p) / trials).sqrt());
}

#[test]
fn continuous_counts_are_poisson() {
    let base = params(10.0, 1.0, 10.0, 1.0, 0);
    let lambda = base.mass().value;
    let counts: Vec<u64> = (0..5000)
        .map(|seed| sample_continuous(&common::params(10.0, 1.0, 10.0, 1.0, seed)).unwrap().len() as u64)
        .collect();
    assert!(poisson_gof(&counts, lambda).unwrap().passes(0.01));
}

#[test]
fn continuous_lengths_follow_cdf() {
    let p = params(20.0, 0.5, 8.0, 2.0, 0);
    let mut lengths = Vec::new();
    let mut offsets = Vec::new();
    let mut seed = 0;
    while lengths.len() < 3000 {
        let es = sample_continuous(&params(20.0, 0.5, 8.0, 2.0, seed)).unwrap();
        for &(u, v) in es.edges() {
            lengths.push(v - u);
            offsets.push(u / (20.0 - (v - u)));
        }
        seed += 1;
    }
    assert!(ks_one_sample(&lengths, |r| length_cdf(&p, r)).unwrap().passes(0.01));
    assert!(ks_one_sample(&offsets, |x| x.clamp(0.0, 1.0)).unwrap().passes(0.01));
}

#[test]
fn disjoint_bands_independent() {
    let mut table = vec![vec![0u64; 3]; 3];
    for seed in 0..4000 {
        let es = sample_continuous(&params(8.0, 0.5, 4.0, 1.0, seed)).unwrap();
        let left = es.edges().iter().filter(|&&(_, v)| v < 4.0).count().min(2);
        let right = es.edges().iter().filter(|&&(u, _)| u >= 4.0).count().min(2);
        table[left][right] += 1;
    }
    assert!(chi_square_independence(&table).unwrap().passes(0.01));
}

#[test]
fn samplers_reproducible() {
    let d = DiscreteParams::new(1000, 1.5, 42);
    assert_eq!(sample_discrete(&d).unwrap(), sample_discrete(&d).unwrap());
    let c = params(100.0, 1.0, 100.0, 1.0, 42);
    assert_eq!(sample_continuous(&c).unwrap(), sample_continuous(&c).unwrap());
    assert_ne!(
        sample_discrete(&d).unwrap(),
        sample_discrete(&DiscreteParams { seed: 43, ..d }).unwrap()
    );
}

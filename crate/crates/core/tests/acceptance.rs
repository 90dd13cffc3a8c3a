//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs without the libtest harness so the summary always prints. Exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::census_oracle::naive_jump_lists;
use common::{brute_force_continuous, floyd_warshall, params};
use lrp_core::census::{enumerate_classes, expected_census_size, sample_micro_edges, MicroDomain, MicroEdgeSet};
use lrp_core::coupling::{poisson_mean_cell, tv_bernoulli_poisson, MaximalCoupling};
use lrp_core::metric::{diameter_continuous, diameter_discrete, distance_continuous, distance_discrete};
use lrp_core::model::{edge_probability, sample_continuous, sample_discrete};
use lrp_core::rng::stream;
use lrp_core::scaling::{
    check_multiplicativity, check_tightness, fit_exponent, moment_ratio, run_scaling_experiment, ModelKind,
    ScalingConfig, ScalingSeries,
};
use lrp_core::stats::{ks_two_sample, mean, std_dev};
use lrp_core::{ContinuousEdgeSet, DiscreteGraph, DiscreteParams, MetricMode};
use rand::Rng;

const DISTANCE_REL_TOL: f64 = 1e-12;
const KS_ALPHA: f64 = 0.01;
const SIGMAS: f64 = 3.0;
const TV_BOUND_FACTOR: f64 = 10.0;
const THETA_WINDOW: (f64, f64) = (0.05, 0.95);
const THETA_SE_MAX: f64 = 0.05;
const THETA_FLOOR_HALF: f64 = 0.40;
const MOMENT_GROWTH_MAX: f64 = 1.5;
const TIGHT_C: f64 = 8.0;
const TIGHT_MIN_PROB: f64 = 0.95;
const BAND_LIMIT: f64 = 10.0;
const RATIO_RANGE: f64 = 8.0;
const RATIO_MIN_FRACTION: f64 = 0.95;
const LINEAR_REGIME_TOL: f64 = 0.20;
const LOG_REGIME_FACTOR: f64 = 2.0;

const GRID: [u64; 8] = [1 << 6, 1 << 7, 1 << 8, 1 << 9, 1 << 10, 1 << 11, 1 << 12, 1 << 13];
const REPLICAS: usize = 500;
const SEED: u64 = 20240601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn degenerate() -> Outcome {
    let mut ok = true;
    let mut scales = 0;
    for k in 1..=16 {
        let n = 1usize << k;
        let g = DiscreteGraph::from_edges(n, []).unwrap();
        let d = distance_discrete(&g, 0, n, MetricMode::ConstrainedInterval).unwrap().distance;
        let free = distance_discrete(&g, 0, n, MetricMode::Unconstrained).unwrap().distance;
        let diam = diameter_discrete(&g, 0, n).unwrap().value;
        ok &= d == n && free == n && diam == n;
        let es = ContinuousEdgeSet::new(params(n as f64, 1.0, n as f64, 1.0, 0), []).unwrap();
        for (x, y) in [(0.0, n as f64), (0.25, n as f64 / 3.0), (n as f64 * 0.9, 0.5)] {
            for mode in [MetricMode::ConstrainedInterval, MetricMode::Unconstrained] {
                ok &= distance_continuous(&es, x, y, mode).unwrap().distance == (x - y).abs();
            }
        }
        ok &= diameter_continuous(&es, 0.0, n as f64).unwrap() == n as f64;
        scales += 1;
    }
    outcome(ok, format!("{scales} scales 2^1..2^16, exact equality"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = stream(SEED, &[2]);
    let mut worst = 0.0f64;
    for inst in 0..200u64 {
        let mut edges = Vec::new();
        let k = rng.random_range(0..=6);
        while edges.len() < k {
            let (u, v) = (rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0);
            if (u - v).abs() > 0.1 {
                edges.push((u, v));
            }
        }
        let es = ContinuousEdgeSet::new(params(10.0, 0.1, 10.0, 1.0, inst), edges).unwrap();
        for _ in 0..10 {
            let (x, y) = (rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0);
            for (mode, lo, hi) in [
                (MetricMode::ConstrainedInterval, x.min(y), x.max(y)),
                (MetricMode::Unconstrained, 0.0, 10.0),
            ] {
                let got = distance_continuous(&es, x, y, mode).unwrap().distance;
                let want = brute_force_continuous(&es, x, y, lo, hi);
                worst = worst.max((got - want).abs() / want.max(1e-300));
            }
        }
    }
    let mut mismatches = 0;
    for inst in 0..200u64 {
        let n = rng.random_range(2..=128usize);
        let g = sample_discrete(&DiscreteParams::new(n, rng.random_range(0.2..3.0), inst)).unwrap();
        let fw = floyd_warshall(&g, 0, n);
        for x in 0..=n {
            for y in [0, n / 2, n] {
                let d = distance_discrete(&g, x, y, MetricMode::Unconstrained).unwrap().distance;
                mismatches += usize::from(d as u32 != fw[x][y]);
            }
        }
        let sub = floyd_warshall(&g, n / 4, n);
        let d = distance_discrete(&g, n / 4, n, MetricMode::ConstrainedInterval).unwrap().distance;
        mismatches += usize::from(d as u32 != sub[0][n - n / 4]);
    }
    outcome(
        worst <= DISTANCE_REL_TOL && mismatches == 0,
        format!("continuous max rel err {worst:.2e}, discrete mismatches {mismatches}"),
    )
}

fn self_similarity() -> Outcome {
    let (delta, delta_p, x, beta, reps) = (0.1, 0.2, 1.0, 1.0, 2000u64);
    let left: Vec<f64> = (0..reps)
        .map(|r| {
            let es = sample_continuous(&params(x / delta, delta_p, 1.0, beta, 2 * r)).unwrap();
            delta * distance_continuous(&es, 0.0, x / delta, MetricMode::ConstrainedInterval).unwrap().distance
        })
        .collect();
    let right: Vec<f64> = (0..reps)
        .map(|r| {
            let es = sample_continuous(&params(x, delta * delta_p, delta, beta, 2 * r + 1)).unwrap();
            distance_continuous(&es, 0.0, x, MetricMode::ConstrainedInterval).unwrap().distance
        })
        .collect();
    let ks = ks_two_sample(&left, &right).unwrap();
    outcome(
        ks.passes(KS_ALPHA),
        format!("KS D={:.4} p={:.3} (alpha {KS_ALPHA})", ks.statistic, ks.p_value),
    )
}

fn poisson_mass() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (l, d, dp, b)) in [(10.0, 1.0, 10.0, 1.0), (50.0, 0.5, 20.0, 0.7), (5.0, 0.2, 3.0, 2.5)]
        .into_iter()
        .enumerate()
    {
        let lambda = params(l, d, dp, b, 0).mass().value;
        let counts: Vec<f64> = (0..10_000u64)
            .map(|s| sample_continuous(&params(l, d, dp, b, 1_000_000 * i as u64 + s)).unwrap().len() as f64)
            .collect();
        let m = mean(&counts);
        let z = (m - lambda) / (lambda / counts.len() as f64).sqrt();
        ok &= z.abs() <= SIGMAS;
        parts.push(format!("{lambda:.4}: z={z:+.2}"));
    }
    outcome(ok, parts.join(", "))
}

fn coupling_tv() -> Outcome {
    let mut worst = 0.0f64;
    for beta in [0.5, 1.0, 2.0] {
        for d in 2..=1000i64 {
            let p = edge_probability(beta, 2.0, d as u64).unwrap();
            let tv = tv_bernoulli_poisson(p, poisson_mean_cell(beta, 0, d).unwrap()).unwrap();
            worst = worst.max(tv * (d as f64).powi(4) / (beta + beta * beta));
        }
    }
    let lambda = poisson_mean_cell(1.0, 0, 2).unwrap();
    let c = MaximalCoupling::new(0.25, lambda).unwrap();
    let mut rng = stream(SEED, &[5]);
    let draws = 100_000;
    let differ = (0..draws)
        .filter(|_| {
            let (x, y) = c.sample(&mut rng);
            u64::from(x) != y
        })
        .count();
    let freq = differ as f64 / draws as f64;
    let z = (freq - c.tv()) / (c.tv() * (1.0 - c.tv()) / draws as f64).sqrt();
    outcome(
        worst <= TV_BOUND_FACTOR && z.abs() <= SIGMAS,
        format!("max tv d^4/(b+b^2) = {worst:.3}, mismatch z={z:+.2}"),
    )
}

struct ScalingRuns {
    series: Vec<(f64, ScalingSeries)>,
}

fn scaling_runs() -> ScalingRuns {
    let series = [0.5, 1.0, 2.0]
        .into_iter()
        .map(|beta| {
            let cfg = ScalingConfig::new(beta, ModelKind::Discrete, GRID.to_vec(), REPLICAS, SEED);
            (beta, run_scaling_experiment(&cfg).unwrap())
        })
        .collect();
    ScalingRuns { series }
}

fn exponent_window(runs: &ScalingRuns) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (beta, s) in &runs.series {
        let fit = fit_exponent(s).unwrap();
        ok &= fit.theta_hat > THETA_WINDOW.0 && fit.theta_hat < THETA_WINDOW.1 && fit.std_error < THETA_SE_MAX;
        if *beta == 0.5 {
            ok &= fit.theta_hat >= THETA_FLOOR_HALF;
        }
        parts.push(format!("b={beta}: {:.3}+-{:.3}", fit.theta_hat, fit.std_error));
    }
    outcome(ok, parts.join(", "))
}

fn moment_trend(runs: &ScalingRuns) -> Outcome {
    let s = &runs.series.iter().find(|(b, _)| *b == 1.0).unwrap().1;
    let ratios = moment_ratio(s, 2).unwrap();
    let (first, last) = (ratios.first().unwrap(), ratios.last().unwrap());
    outcome(
        last.ratio <= MOMENT_GROWTH_MAX * first.ratio,
        format!(
            "E d^2/(E d)^2: {:.4} [{:.4}, {:.4}] at 2^6 -> {:.4} [{:.4}, {:.4}] at 2^13",
            first.ratio, first.ci_low, first.ci_high, last.ratio, last.ci_low, last.ci_high
        ),
    )
}

fn tightness(runs: &ScalingRuns) -> Outcome {
    let s = &runs.series.iter().find(|(b, _)| *b == 1.0).unwrap().1;
    let report = check_tightness(&s.point(1 << 12).unwrap().samples).unwrap();
    let prob = report.levels.iter().find(|(c, _)| *c == TIGHT_C).unwrap().1;
    outcome(
        prob >= TIGHT_MIN_PROB,
        format!("P(E/8 <= d <= 8E) = {prob:.3} over {} replicas at 2^12", report.replicas),
    )
}

fn multiplicativity(runs: &ScalingRuns) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (beta, s) in &runs.series {
        let r = check_multiplicativity(s, BAND_LIMIT).unwrap();
        ok &= r.within_band;
        let (lo, hi) = r.band.unwrap_or((f64::NAN, f64::NAN));
        parts.push(format!("b={beta}: {} triples in [{lo:.3}, {hi:.3}]", r.triples.len()));
    }
    // a wider grid gives many more triples
    let cfg = ScalingConfig::new(1.0, ModelKind::Discrete, (2..=13).map(|k| 1u64 << k).collect(), REPLICAS, SEED);
    let wide = check_multiplicativity(&run_scaling_experiment(&cfg).unwrap(), BAND_LIMIT).unwrap();
    ok &= wide.within_band;
    let (lo, hi) = wide.band.unwrap();
    parts.push(format!("b=1 grid 2^2..2^13: {} triples in [{lo:.3}, {hi:.3}]", wide.triples.len()));
    outcome(ok, parts.join(", "))
}

fn three_metrics() -> Outcome {
    let (n, reps) = (1usize << 10, 200u64);
    let mut ordered = true;
    let mut good = 0;
    for r in 0..reps {
        let g = sample_discrete(&DiscreteParams::new(3 * n, 1.0, lrp_core::rng::derive_seed(SEED, &[10, r]))).unwrap();
        let free = distance_discrete(&g, n, 2 * n, MetricMode::Unconstrained).unwrap().distance as f64;
        let d = distance_discrete(&g, n, 2 * n, MetricMode::ConstrainedInterval).unwrap().distance as f64;
        let diam = diameter_discrete(&g, n, 2 * n).unwrap();
        ordered &= diam.exact && free <= d && d <= diam.value as f64;
        let inside = |q: f64| (1.0 / RATIO_RANGE..=RATIO_RANGE).contains(&q);
        good += usize::from(inside(free / d) && inside(diam.value as f64 / d));
    }
    let frac = good as f64 / reps as f64;
    outcome(
        ordered && frac >= RATIO_MIN_FRACTION,
        format!("d* <= d <= Diam on all: {ordered}, both ratios in [1/8, 8]: {frac:.3}"),
    )
}

fn regime_means(s: f64, beta: f64, scales: &[u64], reps: u64) -> Vec<f64> {
    scales
        .iter()
        .map(|&n| {
            let ds: Vec<f64> = (0..reps)
                .map(|r| {
                    let seed = lrp_core::rng::derive_seed(SEED, &[11, s.to_bits(), n, r]);
                    let g = sample_discrete(&DiscreteParams::new(n as usize, beta, seed).with_exponent(s)).unwrap();
                    distance_discrete(&g, 0, n as usize, MetricMode::ConstrainedInterval).unwrap().distance as f64
                })
                .collect();
            mean(&ds)
        })
        .collect()
}

fn cross_regime() -> Outcome {
    let linear = regime_means(3.0, 1.0, &[1 << 12, 1 << 13], 200);
    let (r12, r13) = (linear[0] / 4096.0, linear[1] / 8192.0);
    let linear_ok = (r12 / r13 - 1.0).abs() <= LINEAR_REGIME_TOL;
    let top = [1u64 << 11, 1 << 12, 1 << 13];
    let logs: Vec<f64> = regime_means(1.0, 1.0, &top, 200)
        .iter()
        .zip(top)
        .map(|(d, n)| {
            let l = (n as f64).ln();
            d * l.ln() / l
        })
        .collect();
    let (lo, hi) = logs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let log_ok = hi / lo <= LOG_REGIME_FACTOR;
    outcome(
        linear_ok && log_ok,
        format!(
            "s=3 d/n: {r12:.4} at 2^12, {r13:.4} at 2^13; s=1 d lnln n/ln n: {}",
            logs.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn census() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let domain = MicroDomain::new(8);
    for (t, beta) in [(1.0, 0.5), (2.0, 1.0), (2.0, 0.5)] {
        let exact = expected_census_size(domain, beta, t).unwrap();
        let sizes: Vec<f64> = (0..10_000u64)
            .map(|r| enumerate_classes(&sample_micro_edges(domain, beta, SEED, r).unwrap(), t, 0.5).unwrap().len() as f64)
            .collect();
        let se = std_dev(&sizes) / (sizes.len() as f64).sqrt();
        let z = (mean(&sizes) - exact) / se;
        ok &= z.abs() <= SIGMAS;
        parts.push(format!("t={t} b={beta}: E={exact:.4} z={z:+.2}"));
    }
    let mut rng = stream(SEED, &[12]);
    let mut agree = 0;
    for _ in 0..50 {
        let n = rng.random_range(2..=8u32);
        let t = [1.0, 2.0, 3.0][rng.random_range(0..3)];
        let span = 3 * n as i64;
        let mut edges = BTreeSet::new();
        let k = rng.random_range(1..=4);
        while edges.len() < k {
            let (a, b) = (rng.random_range(-span..=span), rng.random_range(-span..=span));
            if a.abs_diff(b) >= n as u64 {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let es = MicroEdgeSet::new(n, edges).unwrap();
        let dfs: BTreeSet<_> = enumerate_classes(&es, t, 0.5)
            .unwrap()
            .classes
            .into_iter()
            .map(|c| c.class.jumps)
            .collect();
        agree += usize::from(dfs == naive_jump_lists(&es, (n as f64 * t) as u64));
    }
    ok &= agree == 50;
    parts.push(format!("oracle agreement {agree}/50"));
    outcome(ok, parts.join(", "))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {} ({:.1}s)", o.detail, start.elapsed().as_secs_f64());
        failures += usize::from(!o.pass);
    };
    report(1, "degenerate exactness", &degenerate);
    report(2, "oracle equivalence", &oracle_equivalence);
    report(3, "self-similarity", &self_similarity);
    report(4, "poisson mass", &poisson_mass);
    report(5, "coupling tv", &coupling_tv);
    let runs = scaling_runs();
    report(6, "exponent window", &|| exponent_window(&runs));
    report(7, "moment ratios", &|| moment_trend(&runs));
    report(8, "tightness", &|| tightness(&runs));
    report(9, "multiplicativity band", &|| multiplicativity(&runs));
    report(10, "three-metric consistency", &three_metrics);
    report(11, "cross-regime sanity", &cross_regime);
    report(12, "path census", &census);
    println!("acceptance: {} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

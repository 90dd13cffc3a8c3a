//! Independent reference implementations used by several test targets.
#![allow(dead_code)]

pub mod census_oracle;

use lrp_core::{ContinuousEdgeSet, ContinuousParams, DiscreteGraph};

/// All-pairs hop distances on the induced subgraph of `[lo, hi]`.
pub fn floyd_warshall(g: &DiscreteGraph, lo: usize, hi: usize) -> Vec<Vec<u32>> {
    let k = hi - lo + 1;
    let inf = u32::MAX / 4;
    let mut d = vec![vec![inf; k]; k];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
        if i + 1 < k {
            row[i + 1] = 1;
        }
        if i > 0 {
            row[i - 1] = 1;
        }
    }
    for &(a, b) in g.long_edges() {
        if a >= lo && b <= hi {
            d[a - lo][b - lo] = 1;
            d[b - lo][a - lo] = 1;
        }
    }
    for m in 0..k {
        for i in 0..k {
            for j in 0..k {
                let via = d[i][m] + d[m][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Shortest walking cost over every ordered, oriented sequence of distinct
/// edges with both ends in `[lo, hi]`.
pub fn brute_force_continuous(es: &ContinuousEdgeSet, x: f64, y: f64, lo: f64, hi: f64) -> f64 {
    let edges: Vec<(f64, f64)> = es
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| u >= lo && v <= hi)
        .collect();
    let mut best = (x - y).abs();
    let mut used = vec![false; edges.len()];
    extend(&edges, &mut used, x, 0.0, y, &mut best);
    best
}

fn extend(edges: &[(f64, f64)], used: &mut [bool], at: f64, cost: f64, y: f64, best: &mut f64) {
    *best = best.min(cost + (at - y).abs());
    for i in 0..edges.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (u, v) = edges[i];
        extend(edges, used, v, cost + (at - u).abs(), y, best);
        extend(edges, used, u, cost + (at - v).abs(), y, best);
        used[i] = false;
    }
}

pub fn params(length: f64, delta: f64, delta_prime: f64, beta: f64, seed: u64) -> ContinuousParams {
    ContinuousParams {
        length,
        delta,
        delta_prime,
        beta,
        seed,
    }
}

/// Binomial/normal tolerance: `k` standard errors of a mean of `reps` draws
/// with variance `var`.
pub fn sigma_band(var: f64, reps: usize, k: f64) -> f64 {
    k * (var / reps as f64).sqrt()
}

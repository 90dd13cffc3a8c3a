//! Rescaling of continuous instances and the cell-wise coupling of the
//! discrete and continuous models.
//!
//! For each pair of sites `k < l` with `l - k >= 2` the coupling draws a
//! Bernoulli coordinate (is the discrete edge `(k, l)` present?) and a
//! Poisson coordinate (how many continuous edges join the unit cells around
//! `k` and `l`?) from a maximal coupling of their laws, independently across
//! cells.
//!
//! Continuous coordinates are shifted by one half: site `k` owns the cell
//! `(k, k + 1)`, so the coupled continuous instance lives on `[0, n + 1]`
//! with window `(1, n + 1)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{ContinuousEdgeSet, ContinuousParams, DiscreteGraph};
use crate::rng::{self, open01, tag};

/// Maps every edge `(u, v)` to `(delta u, delta v)`; the window and domain
/// scale with it.
pub fn rescale_edges(es: &ContinuousEdgeSet, delta: f64) -> Result<ContinuousEdgeSet> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid("delta", "must be positive"));
    }
    let p = es.params;
    let params = ContinuousParams {
        length: delta * p.length,
        delta: delta * p.delta,
        delta_prime: delta * p.delta_prime,
        ..p
    };
    let edges = es.edges().iter().map(|&(u, v)| (delta * u, delta * v)).collect();
    Ok(ContinuousEdgeSet::from_raw_sorted(params, edges))
}

/// `beta * ln(d^2 / (d^2 - 1))` with `d = |k - l|`: the mean number of
/// continuous edges between the unit cells centred at `k` and `l`.
pub fn poisson_mean_cell(beta: f64, k: i64, l: i64) -> Result<f64> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid("beta", "must be non-negative"));
    }
    let d = k.abs_diff(l);
    if d < 2 {
        return Err(invalid("l", "cells must be at least two apart"));
    }
    let d2 = (d as f64).powi(2);
    Ok(-beta * (-1.0 / d2).ln_1p())
}

/// `P(Poisson(lambda) >= 2)` without cancellation for small `lambda`.
fn poisson_tail2(lambda: f64) -> f64 {
    if lambda >= 1.0 {
        return 1.0 - (-lambda).exp() * (1.0 + lambda);
    }
    let mut term = lambda * lambda / 2.0;
    let mut sum = 0.0f64;
    let mut j = 2.0;
    // terms shrink by at least a factor 1/3 from here on
    while term > 1e-17 * sum {
        sum += term;
        j += 1.0;
        term *= lambda / j;
    }
    sum * (-lambda).exp()
}

fn validate_pair(p: f64, lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", "must lie in [0, 1]"));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", "must be non-negative and finite"));
    }
    Ok(())
}

/// Total variation distance between `Bernoulli(p)` and `Poisson(lambda)`.
pub fn tv_bernoulli_poisson(p: f64, lambda: f64) -> Result<f64> {
    validate_pair(p, lambda)?;
    let at_zero = (-(-lambda).exp_m1() - p).abs();
    let at_one = (p - lambda * (-lambda).exp()).abs();
    Ok((0.5 * (at_zero + at_one + poisson_tail2(lambda))).clamp(0.0, 1.0))
}

/// Shared-mass construction of a maximal coupling of `Bernoulli(p)` and
/// `Poisson(lambda)`: with probability `1 - TV` both coordinates equal a
/// draw from the overlap, otherwise each comes from its own residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximalCoupling {
    p: f64,
    lambda: f64,
    common0: f64,
    common1: f64,
    tv: f64,
}

impl MaximalCoupling {
    pub fn new(p: f64, lambda: f64) -> Result<Self> {
        let tv = tv_bernoulli_poisson(p, lambda)?;
        let e = (-lambda).exp();
        Ok(Self {
            p,
            lambda,
            common0: (1.0 - p).min(e),
            common1: p.min(lambda * e),
            tv,
        })
    }

    pub fn tv(&self) -> f64 {
        self.tv
    }

    /// One `(bernoulli, poisson)` draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (bool, u64) {
        let u: f64 = rng.random();
        if u < self.common0 {
            return (false, 0);
        }
        if u < self.common0 + self.common1 {
            return (true, 1);
        }
        let ber_one = self.p - self.common1;
        let ber_zero = (1.0 - self.p) - self.common0;
        let x = rng.random::<f64>() * (ber_one + ber_zero) < ber_one;

        let e = (-self.lambda).exp();
        let poi_zero = e - self.common0;
        let poi_one = self.lambda * e - self.common1;
        let tail = poisson_tail2(self.lambda);
        let mut v = rng.random::<f64>() * (poi_zero + poi_one + tail);
        if v < poi_zero {
            return (x, 0);
        }
        v -= poi_zero;
        if v < poi_one {
            return (x, 1);
        }
        v -= poi_one;
        // walk the Poisson pmf from j = 2
        let mut j = 2u64;
        let mut pmf = self.lambda * self.lambda / 2.0 * e;
        loop {
            if v < pmf || pmf == 0.0 && j as f64 > self.lambda {
                return (x, j);
            }
            v -= pmf;
            j += 1;
            pmf *= self.lambda / j as f64;
        }
    }
}

/// Draw from the maximal coupling using a seeded stream.
pub fn maximal_coupling_sample(p: f64, lambda: f64, seed: u64) -> Result<(bool, u64)> {
    let coupling = MaximalCoupling::new(p, lambda)?;
    Ok(coupling.sample(&mut rng::stream(seed, &[tag::COUPLING_CELL])))
}

/// Where the Poisson edges of a cell are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellPlacement {
    /// Uniform over the cell.
    #[default]
    Uniform,
    /// The intensity `(y - x)^-2` restricted to the cell (rejection sampled).
    Intensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellCouplingOutcome {
    pub k: usize,
    pub l: usize,
    pub bernoulli_present: bool,
    pub poisson_count: u64,
    /// Both absent or both present.
    pub matched: bool,
    pub tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub n: usize,
    pub beta: f64,
    pub seed: u64,
    pub outcomes: Vec<CellCouplingOutcome>,
    pub mismatches: usize,
    /// Sum of per-cell TV distances: the expected number of cells whose coupled
    /// counts differ, which bounds the expected mismatch tally.
    pub tv_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceClassSummary {
    pub distance: usize,
    pub cells: usize,
    pub mismatches: usize,
    pub tv: f64,
}

impl CouplingReport {
    /// Mismatches grouped by cell separation `l - k`.
    pub fn by_distance(&self) -> Vec<DistanceClassSummary> {
        let mut out: Vec<DistanceClassSummary> = (2..=self.n)
            .map(|d| DistanceClassSummary {
                distance: d,
                cells: 0,
                mismatches: 0,
                tv: 0.0,
            })
            .collect();
        for o in &self.outcomes {
            let s = &mut out[o.l - o.k - 2];
            s.cells += 1;
            s.mismatches += usize::from(!o.matched);
            s.tv = o.tv;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSample {
    pub discrete: DiscreteGraph,
    pub continuous: ContinuousEdgeSet,
    pub report: CouplingReport,
}

/// Couples the discrete graph on `{0, ..., n}` with the continuous instance
/// on `[0, n + 1]`, cell by cell.
pub fn couple_models(n: usize, beta: f64, seed: u64, placement: CellPlacement) -> Result<CoupledSample> {
    if n < 2 {
        return Err(invalid("n", "need n >= 2 for any long-edge cell"));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid("beta", "must be positive"));
    }
    let per_distance: Vec<MaximalCoupling> = (2..=n)
        .map(|d| {
            let p = (beta / (d as f64).powi(2)).min(1.0);
            MaximalCoupling::new(p, poisson_mean_cell(beta, 0, d as i64)?)
        })
        .collect::<Result<_>>()?;

    let rows: Vec<(Vec<CellCouplingOutcome>, Vec<(f64, f64)>)> = (0..n - 1)
        .into_par_iter()
        .map(|k| {
            let mut outcomes = Vec::with_capacity(n - k - 1);
            let mut edges = Vec::new();
            for l in k + 2..=n {
                let d = l - k;
                let coupling = &per_distance[d - 2];
                let mut rng = rng::stream(seed, &[tag::COUPLING_CELL, k as u64, l as u64]);
                let (present, count) = coupling.sample(&mut rng);
                for _ in 0..count {
                    edges.push(place_in_cell(&mut rng, k, l, placement));
                }
                outcomes.push(CellCouplingOutcome {
                    k,
                    l,
                    bernoulli_present: present,
                    poisson_count: count,
                    matched: present == (count >= 1),
                    tv: coupling.tv(),
                });
            }
            (outcomes, edges)
        })
        .collect();

    let mut outcomes = Vec::new();
    let mut edges = Vec::new();
    for (o, e) in rows {
        outcomes.extend(o);
        edges.extend(e);
    }
    let discrete = DiscreteGraph::from_edges(
        n,
        outcomes.iter().filter(|o| o.bernoulli_present).map(|o| (o.k, o.l)),
    )?;
    let params = ContinuousParams {
        length: (n + 1) as f64,
        delta: 1.0,
        delta_prime: (n + 1) as f64,
        beta,
        seed,
    };
    let continuous = ContinuousEdgeSet::new(params, edges)?;
    let mismatches = outcomes.iter().filter(|o| !o.matched).count();
    let tv_sum = outcomes.iter().map(|o| o.tv).sum();
    Ok(CoupledSample {
        discrete,
        continuous,
        report: CouplingReport {
            n,
            beta,
            seed,
            outcomes,
            mismatches,
            tv_sum,
        },
    })
}

fn place_in_cell<R: Rng + ?Sized>(rng: &mut R, k: usize, l: usize, placement: CellPlacement) -> (f64, f64) {
    let min_len = (l - k - 1) as f64;
    loop {
        let u = k as f64 + open01(rng);
        let v = l as f64 + open01(rng);
        let len = v - u;
        if !(len > 1.0) {
            continue;
        }
        match placement {
            CellPlacement::Uniform => return (u, v),
            CellPlacement::Intensity => {
                if rng.random::<f64>() < (min_len / len).powi(2) {
                    return (u, v);
                }
            }
        }
    }
}

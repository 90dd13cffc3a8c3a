//! Proper-path classes on the fine lattice `Z/n`.
//!
//! Positions are integer steps; one length unit is `n` steps. A long edge
//! joins two positions at least `n` steps apart and is present with
//! probability `beta / D^2` for displacement `D`. A class is a start at the
//! origin plus an ordered list of directed jumps; walking between jumps is
//! free in direction, so a class is determined by its jumps alone.
//!
//! Membership of `P_t` asks that the forced walking (origin to the first jump,
//! then between consecutive jumps) fits in `n t` steps. The stored
//! representative ends with the shortest completing gap that brings its total
//! length into `(t/2, t]`.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LrpError, Result};
use crate::rng::{self, tag};

/// Hard cap on search states for both the enumerator and the exact sum.
pub const STATE_BUDGET: usize = 10_000_000;

/// The enumerable window `[-radius n, radius n]` at resolution `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroDomain {
    pub n: u32,
    #[serde(default = "default_radius")]
    pub radius: u32,
}

fn default_radius() -> u32 {
    1
}

impl MicroDomain {
    pub fn new(n: u32) -> Self {
        Self { n, radius: 1 }
    }

    pub fn with_radius(n: u32, radius: u32) -> Self {
        Self { n, radius }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(invalid("n", "resolution must be at least 1"));
        }
        if self.radius < 1 {
            return Err(invalid("radius", "must be at least 1"));
        }
        if self.sites() > 128 {
            return Err(invalid("radius", "domain exceeds 128 sites"));
        }
        Ok(())
    }

    pub fn lo(&self) -> i64 {
        -((self.radius * self.n) as i64)
    }

    pub fn hi(&self) -> i64 {
        (self.radius * self.n) as i64
    }

    pub fn sites(&self) -> usize {
        2 * (self.radius as usize) * (self.n as usize) + 1
    }

    /// Walking budget in steps for window parameter `t`.
    pub fn budget(&self, t: f64) -> Result<u64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid("t", "must be positive"));
        }
        let steps = (self.n as f64 * t + 1e-9).floor() as u64;
        if min_total_steps(steps) > steps {
            return Err(invalid("t", "n t must be at least 2 steps"));
        }
        Ok(steps)
    }
}

/// Smallest step count strictly above half the budget.
fn min_total_steps(budget: u64) -> u64 {
    budget / 2 + 1
}

/// Presence probability of a long edge with displacement `d` steps.
pub fn micro_edge_probability(beta: f64, d: i64) -> f64 {
    (beta / (d as f64).powi(2)).min(1.0)
}

/// Undirected long edges on `Z/n`, in integer steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroEdgeSet {
    pub n: u32,
    edges: Vec<(i64, i64)>,
}

impl MicroEdgeSet {
    pub fn new(n: u32, edges: impl IntoIterator<Item = (i64, i64)>) -> Result<Self> {
        if n < 1 {
            return Err(invalid("n", "resolution must be at least 1"));
        }
        let mut out: Vec<(i64, i64)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        if out.iter().any(|&(a, b)| b - a < n as i64) {
            return Err(invalid("edges", "long edges span at least n steps"));
        }
        out.sort_unstable();
        if out.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("edges", "duplicate edge"));
        }
        Ok(Self { n, edges: out })
    }

    pub fn edges(&self) -> &[(i64, i64)] {
        &self.edges
    }

    /// Every admissible edge of the domain.
    pub fn complete(domain: MicroDomain) -> Result<Self> {
        domain.validate()?;
        Self::new(domain.n, candidate_pairs(domain))
    }
}

fn candidate_pairs(domain: MicroDomain) -> impl Iterator<Item = (i64, i64)> {
    let (lo, hi, n) = (domain.lo(), domain.hi(), domain.n as i64);
    (lo..=hi).flat_map(move |a| (a + n..=hi).map(move |b| (a, b)))
}

/// Independent Bernoulli edges over the domain.
pub fn sample_micro_edges(domain: MicroDomain, beta: f64, seed: u64, replica: u64) -> Result<MicroEdgeSet> {
    domain.validate()?;
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid("beta", "must be non-negative"));
    }
    let mut rng = rng::stream(seed, &[tag::MICRO_EDGES, domain.n as u64, domain.radius as u64, replica]);
    let edges: Vec<_> = candidate_pairs(domain)
        .filter(|&(a, b)| rng.random::<f64>() < micro_edge_probability(beta, b - a))
        .collect();
    MicroEdgeSet::new(domain.n, edges)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProperPathClass {
    pub start: i64,
    /// Directed jumps `(from, to)` in traversal order.
    pub jumps: Vec<(i64, i64)>,
    /// Gap lengths in steps: the initial gap, one per consecutive jump pair,
    /// then the completing gap.
    pub gaps: Vec<u64>,
}

impl ProperPathClass {
    fn from_jumps(jumps: Vec<(i64, i64)>, budget: u64) -> Self {
        let mut gaps = Vec::with_capacity(jumps.len() + 1);
        let mut pos = 0i64;
        for &(u, v) in &jumps {
            gaps.push(pos.abs_diff(u));
            pos = v;
        }
        let forced: u64 = gaps.iter().sum();
        gaps.push(min_total_steps(budget).saturating_sub(forced));
        Self { start: 0, jumps, gaps }
    }

    pub fn hops(&self) -> usize {
        self.jumps.len()
    }

    pub fn total_steps(&self) -> u64 {
        self.gaps.iter().sum()
    }

    pub fn total_length(&self, n: u32) -> f64 {
        self.total_steps() as f64 / n as f64
    }

    /// Lengths of the non-empty gaps in length units.
    pub fn gap_lengths(&self, n: u32) -> impl Iterator<Item = f64> + '_ {
        self.gaps.iter().filter(|&&g| g > 0).map(move |&g| g as f64 / n as f64)
    }

    /// Properness: interior gaps non-empty, no position used by two jumps,
    /// every jump spans at least `n` steps.
    pub fn is_proper(&self, n: u32) -> bool {
        let k = self.jumps.len();
        if self.gaps.len() != k + 1 || k >= 2 && self.gaps[1..k].contains(&0) {
            return false;
        }
        let mut seen = HashSet::new();
        self.jumps
            .iter()
            .all(|&(u, v)| u.abs_diff(v) >= n as u64 && seen.insert(u) && seen.insert(v))
    }

    /// `beta / D^2` over the jumps.
    pub fn probability(&self, beta: f64) -> f64 {
        self.jumps.iter().map(|&(u, v)| micro_edge_probability(beta, v - u)).product()
    }
}

/// How the final gap of a representative is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalGapRule {
    /// End after the last jump plus the shortest gap reaching `(t/2, t]`.
    MinimalCompletion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub class: ProperPathClass,
    pub hops: usize,
    pub total_length: f64,
    pub in_t_eps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCensus {
    pub n: u32,
    pub t: f64,
    pub epsilon: f64,
    pub final_gap_rule: FinalGapRule,
    pub classes: Vec<CensusEntry>,
}

impl PathCensus {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn max_hops(&self) -> usize {
        self.classes.iter().map(|c| c.hops).max().unwrap_or(0)
    }

    pub fn count_t_eps(&self) -> usize {
        self.classes.iter().filter(|c| c.in_t_eps).count()
    }

    /// Same classes with the `P_{t, eps}` flags recomputed.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let mut out = self.clone();
        out.epsilon = epsilon;
        for c in &mut out.classes {
            c.in_t_eps = in_t_eps(&c.class, self.n, self.t, epsilon);
        }
        Ok(out)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid("epsilon", "must be positive"));
    }
    Ok(())
}

fn in_t_eps(class: &ProperPathClass, n: u32, t: f64, epsilon: f64) -> bool {
    let long_gaps = class.gap_lengths(n).filter(|&g| g >= epsilon).count();
    long_gaps as f64 <= epsilon * t
}

/// All classes of `P_t` in a realised edge set.
pub fn enumerate_classes(edges: &MicroEdgeSet, t: f64, epsilon: f64) -> Result<PathCensus> {
    enumerate_classes_with_budget(edges, t, epsilon, STATE_BUDGET)
}

pub fn enumerate_classes_with_budget(
    edges: &MicroEdgeSet,
    t: f64,
    epsilon: f64,
    state_budget: usize,
) -> Result<PathCensus> {
    check_epsilon(epsilon)?;
    let n = edges.n;
    let budget = MicroDomain::new(n).budget(t)?;
    let mut by_endpoint: HashMap<i64, Vec<i64>> = HashMap::new();
    for &(a, b) in edges.edges() {
        by_endpoint.entry(a).or_default().push(b);
        by_endpoint.entry(b).or_default().push(a);
    }
    let mut endpoints: Vec<(i64, Vec<i64>)> = by_endpoint.into_iter().collect();
    endpoints.sort_unstable();

    let mut search = Enumerator {
        endpoints: &endpoints,
        used: Vec::new(),
        jumps: Vec::new(),
        found: Vec::new(),
        seen: HashSet::new(),
        states: 0,
        state_budget,
    };
    search.visit(0, budget, true)?;

    let classes = search
        .found
        .into_iter()
        .map(|jumps| {
            let class = ProperPathClass::from_jumps(jumps, budget);
            CensusEntry {
                hops: class.hops(),
                total_length: class.total_length(n),
                in_t_eps: in_t_eps(&class, n, t, epsilon),
                class,
            }
        })
        .collect();
    Ok(PathCensus {
        n,
        t,
        epsilon,
        final_gap_rule: FinalGapRule::MinimalCompletion,
        classes,
    })
}

struct Enumerator<'a> {
    endpoints: &'a [(i64, Vec<i64>)],
    used: Vec<i64>,
    jumps: Vec<(i64, i64)>,
    found: Vec<Vec<(i64, i64)>>,
    seen: HashSet<Vec<(i64, i64)>>,
    states: usize,
    state_budget: usize,
}

impl Enumerator<'_> {
    fn visit(&mut self, pos: i64, budget: u64, first: bool) -> Result<()> {
        self.states += 1;
        if self.states > self.state_budget {
            return Err(LrpError::BudgetExceeded { budget: self.state_budget });
        }
        if self.seen.insert(self.jumps.clone()) {
            self.found.push(self.jumps.clone());
        }
        for (u, partners) in self.endpoints {
            let walk = pos.abs_diff(*u);
            if walk > budget || (walk == 0 && !first) || self.used.contains(u) {
                continue;
            }
            for v in partners {
                if self.used.contains(v) {
                    continue;
                }
                self.used.extend([*u, *v]);
                self.jumps.push((*u, *v));
                let r = self.visit(*v, budget - walk, false);
                self.jumps.pop();
                self.used.truncate(self.used.len() - 2);
                r?;
            }
        }
        Ok(())
    }
}

/// Exact `E|P_t|` over the domain: the sum, over every admissible jump
/// sequence, of the product of its edge probabilities.
pub fn expected_census_size(domain: MicroDomain, beta: f64, t: f64) -> Result<f64> {
    expected_census_size_with_budget(domain, beta, t, STATE_BUDGET)
}

pub fn expected_census_size_with_budget(domain: MicroDomain, beta: f64, t: f64, state_budget: usize) -> Result<f64> {
    domain.validate()?;
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid("beta", "must be non-negative"));
    }
    let budget = domain.budget(t)?;
    if beta == 0.0 {
        return Ok(1.0);
    }
    let mut exact = ExactSum {
        lo: domain.lo(),
        hi: domain.hi(),
        n: domain.n as i64,
        beta,
        memo: HashMap::new(),
        state_budget,
    };
    exact.value(0, budget, 0, true)
}

struct ExactSum {
    lo: i64,
    hi: i64,
    n: i64,
    beta: f64,
    memo: HashMap<(i64, u64, u128), f64>,
    state_budget: usize,
}

impl ExactSum {
    fn bit(&self, x: i64) -> u128 {
        1u128 << (x - self.lo)
    }

    fn value(&mut self, pos: i64, budget: u64, used: u128, first: bool) -> Result<f64> {
        if !first {
            if let Some(&v) = self.memo.get(&(pos, budget, used)) {
                return Ok(v);
            }
        }
        let mut total = 1.0;
        let reach = budget as i64;
        for u in (pos - reach).max(self.lo)..=(pos + reach).min(self.hi) {
            if (u == pos && !first) || used & self.bit(u) != 0 {
                continue;
            }
            let rest = budget - pos.abs_diff(u);
            for v in self.lo..=self.hi {
                if v.abs_diff(u) < self.n as u64 || used & self.bit(v) != 0 {
                    continue;
                }
                let next = used | self.bit(u) | self.bit(v);
                total += micro_edge_probability(self.beta, v - u) * self.value(v, rest, next, false)?;
            }
        }
        if !first {
            if self.memo.len() >= self.state_budget {
                return Err(LrpError::BudgetExceeded { budget: self.state_budget });
            }
            self.memo.insert((pos, budget, used), total);
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub domain: MicroDomain,
    pub replicas: u32,
    pub seed: u64,
    pub epsilon: f64,
    #[serde(default = "default_state_budget")]
    pub state_budget: usize,
}

fn default_state_budget() -> usize {
    STATE_BUDGET
}

impl GrowthConfig {
    pub fn new(domain: MicroDomain, replicas: u32, seed: u64, epsilon: f64) -> Self {
        Self {
            domain,
            replicas,
            seed,
            epsilon,
            state_budget: STATE_BUDGET,
        }
    }
}

pub const GROWTH_ALPHAS: [f64; 3] = [4.0, 8.0, 16.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub t: f64,
    pub exact_e: f64,
    pub log_e_over_t: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    /// `(alpha, fraction of replicas with some class of at least alpha t hops)`.
    pub exceedance: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub beta: f64,
    pub config: GrowthConfig,
    pub rows: Vec<GrowthRow>,
}

/// Exact and sampled census sizes across `t_grid`, plus hop-count tails.
pub fn census_growth_check(beta: f64, t_grid: &[f64], config: GrowthConfig) -> Result<GrowthReport> {
    if config.replicas < 2 {
        return Err(invalid("replicas", "need at least 2"));
    }
    check_epsilon(config.epsilon)?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let exact_e = expected_census_size_with_budget(config.domain, beta, t, config.state_budget)?;
        let tallies: Vec<(usize, usize)> = (0..config.replicas)
            .into_par_iter()
            .map(|r| {
                let edges = sample_micro_edges(config.domain, beta, config.seed, r as u64)?;
                let census = enumerate_classes_with_budget(&edges, t, config.epsilon, config.state_budget)?;
                Ok((census.len(), census.max_hops()))
            })
            .collect::<Result<_>>()?;
        let sizes: Vec<f64> = tallies.iter().map(|&(s, _)| s as f64).collect();
        let reps = tallies.len() as f64;
        let exceedance = GROWTH_ALPHAS
            .iter()
            .map(|&a| {
                let hits = tallies.iter().filter(|&&(_, h)| h as f64 >= a * t).count();
                (a, hits as f64 / reps)
            })
            .collect();
        rows.push(GrowthRow {
            t,
            exact_e,
            log_e_over_t: exact_e.ln() / t,
            mc_mean: crate::stats::mean(&sizes),
            mc_se: crate::stats::std_dev(&sizes) / reps.sqrt(),
            exceedance,
        });
    }
    Ok(GrowthReport {
        beta,
        config,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_edges_single_class() {
        let edges = MicroEdgeSet::new(8, []).unwrap();
        let census = enumerate_classes(&edges, 2.0, 0.5).unwrap();
        assert_eq!(census.len(), 1);
        assert!(census.classes[0].class.jumps.is_empty());
        assert_eq!(census.classes[0].total_length, 9.0 / 8.0);
    }

    #[test]
    fn single_edge_both_orientations() {
        let edges = MicroEdgeSet::new(4, [(-2, 2)]).unwrap();
        let census = enumerate_classes(&edges, 1.0, 0.5).unwrap();
        let mut jumps: Vec<_> = census.classes.iter().map(|c| c.class.jumps.clone()).collect();
        jumps.sort();
        assert_eq!(jumps, vec![vec![], vec![(-2, 2)], vec![(2, -2)]]);
        assert!(census.classes.iter().all(|c| c.class.is_proper(4)));
        assert!(census.classes.iter().all(|c| c.total_length > 0.5 && c.total_length <= 1.0));
    }

    #[test]
    fn jumps_never_reused() {
        // walking back to -2 after the jump would allow reusing the edge
        let edges = MicroEdgeSet::new(4, [(-2, 2), (-1, 3)]).unwrap();
        let census = enumerate_classes(&edges, 3.0, 0.5).unwrap();
        for c in &census.classes {
            assert!(c.class.is_proper(4), "{:?}", c.class);
        }
        assert!(census.classes.iter().any(|c| c.hops == 2));
    }

    #[test]
    fn exact_trivial_cases() {
        let d = MicroDomain::new(4);
        assert_eq!(expected_census_size(d, 0.0, 1.0).unwrap(), 1.0);
        let tiny = MicroDomain::new(2);
        let e = expected_census_size(tiny, 1.0, 1.0).unwrap();
        let complete = MicroEdgeSet::complete(tiny).unwrap();
        let census = enumerate_classes(&complete, 1.0, 0.5).unwrap();
        let sum: f64 = census.classes.iter().map(|c| c.class.probability(1.0)).sum();
        assert!((e - sum).abs() < 1e-12, "{e} {sum}");
    }

    #[test]
    fn budget_refusal() {
        let d = MicroDomain::new(8);
        assert!(matches!(
            expected_census_size_with_budget(d, 1.0, 2.0, 1000),
            Err(LrpError::BudgetExceeded { .. })
        ));
        let complete = MicroEdgeSet::complete(d).unwrap();
        assert!(matches!(
            enumerate_classes_with_budget(&complete, 2.0, 0.5, 1000),
            Err(LrpError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn epsilon_monotone() {
        let edges = sample_micro_edges(MicroDomain::new(4), 4.0, 3, 0).unwrap();
        let census = enumerate_classes(&edges, 2.0, 0.1).unwrap();
        let mut last = 0;
        for eps in [0.1, 0.25, 0.5, 1.0, 2.0] {
            let c = census.with_epsilon(eps).unwrap().count_t_eps();
            assert!(c >= last && c <= census.len());
            last = c;
        }
    }

    #[test]
    fn validation() {
        assert!(MicroEdgeSet::new(4, [(0, 3)]).is_err());
        assert!(MicroEdgeSet::new(4, [(0, 4), (4, 0)]).is_err());
        assert!(MicroDomain::with_radius(64, 1).validate().is_err());
        assert!(MicroDomain::new(8).budget(0.1).is_err());
    }
}

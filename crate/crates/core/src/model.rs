//! Discrete and continuous long-range percolation samples.
//!
//! The discrete model lives on `{0, ..., n}`: every nearest-neighbour pair is
//! connected and a pair at distance `r >= 2` is connected independently with
//! probability `min(beta * r^-s, 1)`.
//!
//! The continuous model is a Poisson process of point pairs `<u, v>` on
//! `[0, L]` with intensity `beta * |u - v|^-2`, keeping only pairs whose length
//! lies strictly inside the window `(delta, delta')`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{self, open01, tag};

/// Connection probability for two sites at distance `r`.
pub fn edge_probability(beta: f64, s: f64, r: u64) -> Result<f64> {
    if r < 1 {
        return Err(invalid("r", "distance must be at least 1"));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid("s", format!("must be positive, got {s}")));
    }
    Ok(if r == 1 { 1.0 } else { prob_unchecked(beta, s, r) })
}

#[inline]
fn prob_unchecked(beta: f64, s: f64, r: u64) -> f64 {
    let r = r as f64;
    let p = if s == 2.0 { beta / (r * r) } else { beta * r.powf(-s) };
    p.min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteParams {
    pub n: usize,
    pub beta: f64,
    #[serde(default = "default_exponent")]
    pub s: f64,
    pub seed: u64,
}

fn default_exponent() -> f64 {
    2.0
}

impl DiscreteParams {
    pub fn new(n: usize, beta: f64, seed: u64) -> Self {
        Self {
            n,
            beta,
            s: 2.0,
            seed,
        }
    }

    pub fn with_exponent(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(invalid("n", "need at least one nearest-neighbour edge"));
        }
        if self.n > u32::MAX as usize {
            return Err(invalid("n", "vertex count exceeds 2^32"));
        }
        edge_probability(self.beta, self.s, 1).map(|_| ())
    }

    /// Mean number of long edges: `sum_{r>=2} (n + 1 - r) p(r)`.
    pub fn expected_long_edges(&self) -> f64 {
        (2..=self.n as u64)
            .map(|r| (self.n as u64 + 1 - r) as f64 * prob_unchecked(self.beta, self.s, r))
            .sum()
    }
}

/// A sampled discrete instance.
///
/// Nearest-neighbour edges `(i, i + 1)` are implicit. Long edges are stored
/// once as `(i, j)` with `i < j`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct DiscreteGraph {
    n: usize,
    long_edges: Vec<(usize, usize)>,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    long_edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for DiscreteGraph {
    type Error = crate::LrpError;
    fn try_from(raw: RawGraph) -> Result<Self> {
        DiscreteGraph::from_edges(raw.n, raw.long_edges)
    }
}

impl From<DiscreteGraph> for RawGraph {
    fn from(g: DiscreteGraph) -> Self {
        RawGraph {
            n: g.n,
            long_edges: g.long_edges,
        }
    }
}

impl DiscreteGraph {
    /// Builds a graph on `{0, ..., n}` from long edges given in any
    /// orientation and order.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n < 1 {
            return Err(invalid("n", "need at least one nearest-neighbour edge"));
        }
        if n > u32::MAX as usize - 1 {
            return Err(invalid("n", "vertex count exceeds 2^32"));
        }
        let mut long_edges = Vec::new();
        for (a, b) in edges {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j > n {
                return Err(invalid("long_edges", format!("({a}, {b}) leaves {{0..{n}}}")));
            }
            if j - i < 2 {
                return Err(invalid(
                    "long_edges",
                    format!("({a}, {b}) is not a long edge"),
                ));
            }
            long_edges.push((i, j));
        }
        long_edges.sort_unstable();
        let before = long_edges.len();
        long_edges.dedup();
        if long_edges.len() != before {
            return Err(invalid("long_edges", "duplicate edge"));
        }
        Ok(Self::from_sorted(n, long_edges))
    }

    fn from_sorted(n: usize, long_edges: Vec<(usize, usize)>) -> Self {
        let mut degree = vec![0u32; n + 2];
        for &(i, j) in &long_edges {
            degree[i + 1] += 1;
            degree[j + 1] += 1;
        }
        for v in 1..degree.len() {
            degree[v] += degree[v - 1];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; 2 * long_edges.len()];
        for &(i, j) in &long_edges {
            neighbors[fill[i] as usize] = j as u32;
            fill[i] += 1;
            neighbors[fill[j] as usize] = i as u32;
            fill[j] += 1;
        }
        for v in 0..=n {
            neighbors[offsets[v] as usize..offsets[v + 1] as usize].sort_unstable();
        }
        Self {
            n,
            long_edges,
            offsets,
            neighbors,
        }
    }

    /// Largest vertex label.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn long_edges(&self) -> &[(usize, usize)] {
        &self.long_edges
    }

    pub fn long_edge_count(&self) -> usize {
        self.long_edges.len()
    }

    /// Long-range neighbours of `v`, ascending.
    pub fn long_neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// Whether `{a, b}` is an edge; nearest-neighbour pairs always are.
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a > self.n || b > self.n || a == b {
            return false;
        }
        a.abs_diff(b) == 1 || self.long_neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    /// Copy of the graph with one long edge removed or added.
    pub fn toggled(&self, edge: (usize, usize)) -> Result<Self> {
        let e = if edge.0 < edge.1 { edge } else { (edge.1, edge.0) };
        let mut edges = self.long_edges.clone();
        match edges.binary_search(&e) {
            Ok(pos) => {
                edges.remove(pos);
                Ok(Self::from_sorted(self.n, edges))
            }
            Err(_) => {
                edges.push(e);
                Self::from_edges(self.n, edges)
            }
        }
    }
}

/// Samples a discrete graph by geometric skipping within each distance class.
pub fn sample_discrete(params: &DiscreteParams) -> Result<DiscreteGraph> {
    params.validate()?;
    let n = params.n;
    let mut rng = rng::stream(params.seed, &[tag::DISCRETE]);
    let mut edges = Vec::new();
    for r in 2..=n {
        let p = prob_unchecked(params.beta, params.s, r as u64);
        let slots = n + 1 - r;
        if p >= 1.0 {
            edges.extend((0..slots).map(|i| (i, i + r)));
            continue;
        }
        let log_q = (-p).ln_1p();
        if log_q == 0.0 {
            continue;
        }
        let mut i = 0usize;
        loop {
            let skip = (open01(&mut rng).ln() / log_q).floor();
            if skip >= (slots - i) as f64 {
                break;
            }
            i += skip as usize;
            edges.push((i, i + r));
            i += 1;
            if i >= slots {
                break;
            }
        }
    }
    edges.sort_unstable();
    Ok(DiscreteGraph::from_sorted(n, edges))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousParams {
    /// Domain is `[0, length]`.
    pub length: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub beta: f64,
    pub seed: u64,
}

impl ContinuousParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(invalid("length", "must be positive and finite"));
        }
        if !(self.delta > 0.0) {
            return Err(invalid("delta", "must be positive"));
        }
        if !(self.delta <= self.delta_prime) {
            return Err(invalid("delta_prime", "window needs delta <= delta'"));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(invalid("beta", "must be positive"));
        }
        Ok(())
    }

    pub fn mass(&self) -> IntensityMass {
        mass_unchecked(self.length, self.delta, self.delta_prime, self.beta)
    }

    /// Upper end of the effective length range `(delta, min(delta', L))`.
    fn upper(&self) -> f64 {
        self.delta_prime.min(self.length)
    }
}

/// Total mass of the truncated intensity over `{0 < x < y < L}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityMass {
    pub value: f64,
    /// Set when `delta >= L`, so no admissible edge fits in the domain.
    pub degenerate: bool,
}

/// `beta * [L (1/delta - 1/delta') - ln(delta'/delta)]`, with `delta'` clamped to `L`.
pub fn edge_intensity_mass(
    length: f64,
    delta: f64,
    delta_prime: f64,
    beta: f64,
) -> Result<IntensityMass> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(invalid("length", "must be positive and finite"));
    }
    if !(delta > 0.0) || !(delta <= delta_prime) {
        return Err(invalid("delta", "window needs 0 < delta <= delta'"));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid("beta", "must be non-negative"));
    }
    Ok(mass_unchecked(length, delta, delta_prime, beta))
}

fn mass_unchecked(length: f64, delta: f64, delta_prime: f64, beta: f64) -> IntensityMass {
    if delta >= length {
        return IntensityMass {
            value: 0.0,
            degenerate: true,
        };
    }
    let hi = delta_prime.min(length);
    IntensityMass {
        value: beta * length_primitive(length, delta, hi),
        degenerate: false,
    }
}

/// `int_delta^r (L - x) x^-2 dx`.
#[inline]
fn length_primitive(length: f64, delta: f64, r: f64) -> f64 {
    let v = length * (1.0 / delta - 1.0 / r) - (r / delta).ln();
    v.max(0.0)
}

/// CDF of a single edge length under the normalised intensity.
pub fn length_cdf(params: &ContinuousParams, r: f64) -> f64 {
    let hi = params.upper();
    if params.delta >= params.length || r <= params.delta {
        return 0.0;
    }
    if r >= hi {
        return 1.0;
    }
    length_primitive(params.length, params.delta, r)
        / length_primitive(params.length, params.delta, hi)
}

fn sample_length<R: Rng + ?Sized>(params: &ContinuousParams, rng: &mut R) -> f64 {
    let (lo0, hi0) = (params.delta, params.upper());
    let total = length_primitive(params.length, lo0, hi0);
    let target = open01(rng) * total;
    let (mut lo, mut hi) = (lo0, hi0);
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if length_primitive(params.length, lo0, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A sampled continuous instance: edges `(u, v)` with `u < v`, sorted by `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousEdgeSet {
    pub params: ContinuousParams,
    edges: Vec<(f64, f64)>,
}

impl ContinuousEdgeSet {
    /// Validates support constraints and sorts the edges.
    pub fn new(params: ContinuousParams, edges: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        params.validate()?;
        let mut out = Vec::new();
        for (a, b) in edges {
            let (u, v) = if a <= b { (a, b) } else { (b, a) };
            if !(u >= 0.0 && v <= params.length) {
                return Err(invalid("edges", format!("<{a}, {b}> leaves [0, L]")));
            }
            let len = v - u;
            if !(len > params.delta && len < params.delta_prime) {
                return Err(invalid(
                    "edges",
                    format!("<{a}, {b}> has length outside the window"),
                ));
            }
            out.push((u, v));
        }
        out.sort_by(|x, y| x.partial_cmp(y).expect("finite endpoints"));
        Ok(Self { params, edges: out })
    }

    pub(crate) fn from_raw_sorted(params: ContinuousParams, edges: Vec<(f64, f64)>) -> Self {
        Self { params, edges }
    }

    pub fn edges(&self) -> &[(f64, f64)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.params.length
    }

    /// Copy without the edge at `index`.
    pub fn without(&self, index: usize) -> Self {
        let mut edges = self.edges.clone();
        edges.remove(index);
        Self::from_raw_sorted(self.params, edges)
    }
}

/// Samples the truncated Poisson edge process on `[0, L]`.
pub fn sample_continuous(params: &ContinuousParams) -> Result<ContinuousEdgeSet> {
    params.validate()?;
    let mass = params.mass();
    if mass.degenerate || mass.value <= 0.0 {
        return Ok(ContinuousEdgeSet::from_raw_sorted(*params, Vec::new()));
    }
    let mut rng = rng::stream(params.seed, &[tag::CONTINUOUS]);
    let count = Poisson::new(mass.value)
        .map_err(|e| invalid("mass", e.to_string()))?
        .sample(&mut rng) as usize;
    let mut edges = Vec::with_capacity(count);
    while edges.len() < count {
        let r = sample_length(params, &mut rng);
        let u = rng.random::<f64>() * (params.length - r);
        let v = (u + r).min(params.length);
        let len = v - u;
        if len > params.delta && len < params.delta_prime {
            edges.push((u, v));
        }
    }
    edges.sort_by(|x, y| x.partial_cmp(y).expect("finite endpoints"));
    Ok(ContinuousEdgeSet::from_raw_sorted(*params, edges))
}

//! Exact graph distances on discrete and continuous samples.
//!
//! Discrete distances count every edge (nearest-neighbour or long) as one
//! step and are computed by breadth-first search. Continuous distances are
//! Euclidean walking cost with free jumps along sampled edges; they are
//! computed by Dijkstra on an auxiliary graph whose nodes are the edge
//! endpoints, with walking arcs between consecutive endpoints and zero-cost
//! jump arcs between the two ends of each edge.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{ContinuousEdgeSet, DiscreteGraph};
use crate::rng::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    /// Only vertices, points and edges inside `[min(x,y), max(x,y)]`.
    ConstrainedInterval,
    /// The whole sampled instance.
    Unconstrained,
}

/// One shortest-path query result.
///
/// For discrete graphs `path` lists every vertex visited. For continuous
/// instances it lists waypoints `x, u_1, v_1, ..., u_m, v_m, y`: the walk
/// segments are `(x, u_1), (v_1, u_2), ...` and `(u_i, v_i)` are jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geodesic<T> {
    pub distance: T,
    /// Number of long edges used.
    pub hops: usize,
    pub path: Vec<T>,
}

/// Walking cost of a continuous waypoint path.
pub fn waypoint_cost(path: &[f64]) -> f64 {
    path.chunks(2)
        .filter(|c| c.len() == 2)
        .map(|c| (c[1] - c[0]).abs())
        .sum()
}

// ---------------------------------------------------------------- discrete

struct Bfs {
    dist: Vec<u32>,
    parent: Vec<u32>,
    queue: VecDeque<u32>,
}

const UNSEEN: u32 = u32::MAX;

impl Bfs {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![UNSEEN; n + 1],
            parent: vec![UNSEEN; n + 1],
            queue: VecDeque::new(),
        }
    }

    /// BFS from `src` over vertices in `[lo, hi]`; returns the last vertex
    /// dequeued (a farthest vertex) or stops early at `target`.
    fn run(&mut self, g: &DiscreteGraph, src: usize, lo: usize, hi: usize, target: Option<usize>) -> usize {
        self.dist[lo..=hi].fill(UNSEEN);
        self.queue.clear();
        self.dist[src] = 0;
        self.parent[src] = UNSEEN;
        self.queue.push_back(src as u32);
        let mut last = src;
        while let Some(v) = self.queue.pop_front() {
            let v = v as usize;
            last = v;
            if Some(v) == target {
                break;
            }
            let next = self.dist[v] + 1;
            let left = v.checked_sub(1).filter(|&w| w >= lo);
            let right = Some(v + 1).filter(|&w| w <= hi);
            let long = g
                .long_neighbors(v)
                .iter()
                .map(|&w| w as usize)
                .filter(|&w| w >= lo && w <= hi);
            for w in left.into_iter().chain(right).chain(long) {
                if self.dist[w] == UNSEEN {
                    self.dist[w] = next;
                    self.parent[w] = v as u32;
                    self.queue.push_back(w as u32);
                }
            }
        }
        last
    }
}

fn check_vertex(g: &DiscreteGraph, name: &'static str, v: usize) -> Result<()> {
    if v > g.n() {
        return Err(invalid(name, format!("vertex {v} outside {{0..{}}}", g.n())));
    }
    Ok(())
}

/// Shortest hop distance between `x` and `y`.
pub fn distance_discrete(g: &DiscreteGraph, x: usize, y: usize, mode: MetricMode) -> Result<Geodesic<usize>> {
    check_vertex(g, "x", x)?;
    check_vertex(g, "y", y)?;
    let (lo, hi) = match mode {
        MetricMode::ConstrainedInterval => (x.min(y), x.max(y)),
        MetricMode::Unconstrained => (0, g.n()),
    };
    let mut bfs = Bfs::new(g.n());
    bfs.run(g, x, lo, hi, Some(y));
    let distance = bfs.dist[y] as usize;
    let mut path = vec![y];
    let mut v = y;
    while v != x {
        v = bfs.parent[v] as usize;
        path.push(v);
    }
    path.reverse();
    let hops = path.windows(2).filter(|w| w[0].abs_diff(w[1]) > 1).count();
    Ok(Geodesic {
        distance,
        hops,
        path,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diameter {
    pub value: usize,
    /// False when `value` is a sampled lower bound.
    pub exact: bool,
}

/// Largest interval length for which [`diameter_discrete`] runs all-pairs BFS.
pub const EXACT_DIAMETER_LIMIT: usize = 1 << 12;

/// Diameter of the subgraph induced by `[a, b]`.
pub fn diameter_discrete(g: &DiscreteGraph, a: usize, b: usize) -> Result<Diameter> {
    diameter_discrete_with_limit(g, a, b, EXACT_DIAMETER_LIMIT)
}

/// As [`diameter_discrete`], switching to a sampled lower bound once
/// `b - a > exact_limit`.
pub fn diameter_discrete_with_limit(g: &DiscreteGraph, a: usize, b: usize, exact_limit: usize) -> Result<Diameter> {
    check_vertex(g, "b", b)?;
    if a > b {
        return Err(invalid("a", "interval needs a <= b"));
    }
    let mut bfs = Bfs::new(g.n());
    if b - a <= exact_limit {
        let mut best = 0;
        for src in a..=b {
            let far = bfs.run(g, src, a, b, None);
            best = best.max(bfs.dist[far] as usize);
        }
        return Ok(Diameter {
            value: best,
            exact: true,
        });
    }
    // Double sweeps from the interval ends plus seeded random sources.
    let mut rng = rng::stream(g.n() as u64, &[tag::SAMPLE_PAIRS, a as u64, b as u64]);
    let mut best = 0;
    let mut sources = vec![a, b];
    sources.extend((0..16).map(|_| rng.random_range(a..=b)));
    for src in sources {
        let far = bfs.run(g, src, a, b, None);
        best = best.max(bfs.dist[far] as usize);
        let far2 = bfs.run(g, far, a, b, None);
        best = best.max(bfs.dist[far2] as usize);
    }
    Ok(Diameter {
        value: best,
        exact: false,
    })
}

// -------------------------------------------------------------- continuous

#[derive(Debug, Clone, Copy, PartialEq)]
struct Label {
    dist: f64,
    hops: u32,
}

const TIE_TOLERANCE: f64 = 1e-12;

impl Label {
    const INF: Label = Label {
        dist: f64::INFINITY,
        hops: u32::MAX,
    };

    /// Strictly preferable: shorter, or tied within tolerance with fewer hops.
    fn beats(self, other: Label) -> bool {
        if other.dist.is_infinite() {
            return self.dist.is_finite();
        }
        let tol = TIE_TOLERANCE * self.dist.abs().max(other.dist.abs());
        self.dist < other.dist - tol || (self.dist <= other.dist + tol && self.hops < other.hops)
    }
}

#[derive(PartialEq)]
struct HeapItem {
    label: Label,
    node: u32,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .label
            .dist
            .total_cmp(&self.label.dist)
            .then_with(|| other.label.hops.cmp(&self.label.hops))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_NODE: u32 = u32::MAX;

/// The auxiliary graph of a continuous instance restricted to a window.
///
/// Built once and queried many times; every query allocates its own scratch
/// space, so a metric can be shared across threads.
#[derive(Debug, Clone)]
pub struct ContinuousMetric {
    lo: f64,
    hi: f64,
    pos: Vec<f64>,
    partner: Vec<u32>,
}

struct Search {
    label: Vec<Label>,
    parent: Vec<u32>,
    via_jump: Vec<bool>,
}

impl ContinuousMetric {
    /// Keeps the edges with both endpoints in `[lo, hi]`.
    pub fn new(edges: &ContinuousEdgeSet, lo: f64, hi: f64) -> Self {
        Self::build(edges, lo, hi, &[])
    }

    fn build(edges: &ContinuousEdgeSet, lo: f64, hi: f64, fixed: &[f64]) -> Self {
        let mut nodes: Vec<(f64, u32)> = Vec::new();
        for &(u, v) in edges.edges() {
            if u >= lo && v <= hi {
                let k = nodes.len() as u32;
                nodes.push((u, k + 1));
                nodes.push((v, k));
            }
        }
        for &p in fixed {
            nodes.push((p, NO_NODE));
        }
        // Sort node ids by position and remap partners.
        let mut order: Vec<u32> = (0..nodes.len() as u32).collect();
        order.sort_by(|&a, &b| {
            nodes[a as usize]
                .0
                .total_cmp(&nodes[b as usize].0)
                .then(a.cmp(&b))
        });
        let mut rank = vec![0u32; nodes.len()];
        for (r, &id) in order.iter().enumerate() {
            rank[id as usize] = r as u32;
        }
        let pos = order.iter().map(|&id| nodes[id as usize].0).collect();
        let partner = order
            .iter()
            .map(|&id| match nodes[id as usize].1 {
                NO_NODE => NO_NODE,
                p => rank[p as usize],
            })
            .collect();
        Self { lo, hi, pos, partner }
    }

    pub fn window(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn node_count(&self) -> usize {
        self.pos.len()
    }

    /// Nodes immediately left and right of `x` (inclusive).
    fn bracket(&self, x: f64) -> [Option<usize>; 2] {
        let right = self.pos.partition_point(|&p| p < x);
        let left = self.pos.partition_point(|&p| p <= x);
        [left.checked_sub(1), (right < self.pos.len()).then_some(right)]
    }

    fn seeds_from_point(&self, x: f64) -> Vec<(usize, Label)> {
        self.bracket(x)
            .into_iter()
            .flatten()
            .map(|i| {
                (
                    i,
                    Label {
                        dist: (self.pos[i] - x).abs(),
                        hops: 0,
                    },
                )
            })
            .collect()
    }

    fn search(&self, seeds: &[(usize, Label)]) -> Search {
        let k = self.pos.len();
        let mut s = Search {
            label: vec![Label::INF; k],
            parent: vec![NO_NODE; k],
            via_jump: vec![false; k],
        };
        let mut heap = BinaryHeap::new();
        for &(i, l) in seeds {
            if l.beats(s.label[i]) {
                s.label[i] = l;
                heap.push(HeapItem { label: l, node: i as u32 });
            }
        }
        while let Some(HeapItem { label, node }) = heap.pop() {
            let i = node as usize;
            if label != s.label[i] {
                continue;
            }
            let mut relax = |j: usize, cand: Label, jump: bool, heap: &mut BinaryHeap<HeapItem>| {
                if cand.beats(s.label[j]) {
                    s.label[j] = cand;
                    s.parent[j] = node;
                    s.via_jump[j] = jump;
                    heap.push(HeapItem { label: cand, node: j as u32 });
                }
            };
            if i > 0 {
                let cand = Label {
                    dist: label.dist + (self.pos[i] - self.pos[i - 1]),
                    hops: label.hops,
                };
                relax(i - 1, cand, false, &mut heap);
            }
            if i + 1 < k {
                let cand = Label {
                    dist: label.dist + (self.pos[i + 1] - self.pos[i]),
                    hops: label.hops,
                };
                relax(i + 1, cand, false, &mut heap);
            }
            let p = self.partner[i];
            if p != NO_NODE {
                let cand = Label {
                    dist: label.dist,
                    hops: label.hops + 1,
                };
                relax(p as usize, cand, true, &mut heap);
            }
        }
        s
    }

    /// Jumps on the search tree path ending at `end`, in travel order.
    fn jumps_to(&self, s: &Search, end: usize) -> Vec<(f64, f64)> {
        let mut jumps = Vec::new();
        let mut v = end;
        while s.parent[v] != NO_NODE {
            let p = s.parent[v] as usize;
            if s.via_jump[v] {
                jumps.push((self.pos[p], self.pos[v]));
            }
            v = p;
        }
        jumps.reverse();
        jumps
    }

    fn geodesic(x: f64, y: f64, jumps: Vec<(f64, f64)>) -> Geodesic<f64> {
        let mut path = Vec::with_capacity(2 * jumps.len() + 2);
        path.push(x);
        for &(u, v) in &jumps {
            path.push(u);
            path.push(v);
        }
        path.push(y);
        Geodesic {
            distance: waypoint_cost(&path),
            hops: jumps.len(),
            path,
        }
    }

    /// Distance between two points of the window.
    pub fn distance(&self, x: f64, y: f64) -> Geodesic<f64> {
        if x == y {
            return Geodesic {
                distance: 0.0,
                hops: 0,
                path: vec![x, y],
            };
        }
        let s = self.search(&self.seeds_from_point(x));
        let mut best = Label {
            dist: (x - y).abs(),
            hops: 0,
        };
        let mut end = None;
        for i in self.bracket(y).into_iter().flatten() {
            let l = s.label[i];
            let cand = Label {
                dist: l.dist + (self.pos[i] - y).abs(),
                hops: l.hops,
            };
            if cand.beats(best) {
                best = cand;
                end = Some(i);
            }
        }
        let jumps = end.map(|e| self.jumps_to(&s, e)).unwrap_or_default();
        Self::geodesic(x, y, jumps)
    }

    /// Distances from the point `x` to every node.
    fn distances_from_node(&self, i: usize) -> Vec<f64> {
        let s = self.search(&[(i, Label { dist: 0.0, hops: 0 })]);
        s.label.into_iter().map(|l| l.dist).collect()
    }
}

fn check_point(es: &ContinuousEdgeSet, name: &'static str, x: f64) -> Result<()> {
    if !(x >= 0.0 && x <= es.length()) {
        return Err(invalid(name, format!("{x} outside [0, {}]", es.length())));
    }
    Ok(())
}

/// Continuous distance between `x` and `y`.
pub fn distance_continuous(es: &ContinuousEdgeSet, x: f64, y: f64, mode: MetricMode) -> Result<Geodesic<f64>> {
    check_point(es, "x", x)?;
    check_point(es, "y", y)?;
    let (lo, hi) = match mode {
        MetricMode::ConstrainedInterval => (x.min(y), x.max(y)),
        MetricMode::Unconstrained => (0.0, es.length()),
    };
    Ok(ContinuousMetric::new(es, lo, hi).distance(x, y))
}

/// Diameter of `[a, b]` using only edges inside `[a, b]`, maximised over all
/// points of the interval (not only edge endpoints).
pub fn diameter_continuous(es: &ContinuousEdgeSet, a: f64, b: f64) -> Result<f64> {
    check_point(es, "a", a)?;
    check_point(es, "b", b)?;
    if !(a < b) {
        return Err(invalid("a", "interval needs a < b"));
    }
    let metric = ContinuousMetric::build(es, a, b, &[a, b]);
    let pos = &metric.pos;
    let k = pos.len();
    let all: Vec<Vec<f64>> = (0..k).map(|i| metric.distances_from_node(i)).collect();

    let mut best = 0.0f64;
    for i in 0..k - 1 {
        let gi = pos[i + 1] - pos[i];
        // Both points inside the same gap.
        best = best.max(0.5 * (gi + all[i][i + 1]));
        for j in i + 1..k - 1 {
            let (nj, nj1) = (pos[j], pos[j + 1]);
            // d(node_alpha, q) for q in gap j is concave piecewise linear in q.
            let to_q = |alpha: usize, q: f64| {
                (q - nj + all[alpha][j]).min(nj1 - q + all[alpha][j + 1])
            };
            let kink = |alpha: usize| {
                (0.5 * (nj + nj1 + all[alpha][j + 1] - all[alpha][j])).clamp(nj, nj1)
            };
            for q in [nj, nj1, kink(i), kink(i + 1)] {
                let v = 0.5 * (gi + to_q(i, q) + to_q(i + 1, q));
                best = best.max(v);
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentQuery {
    pub x: f64,
    pub iota: f64,
}

impl SegmentQuery {
    pub fn new(x: f64, iota: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(invalid("x", "must be positive"));
        }
        if !(iota > 0.0 && iota < 1.0 / 3.0) {
            return Err(invalid("iota", format!("{iota} outside (0, 1/3)")));
        }
        Ok(Self { x, iota })
    }
}

/// Minimum distance from `[0, iota x]` to `[(1 - iota) x, x]`.
///
/// In constrained mode only edges inside `[0, x]` are usable; unconstrained
/// mode admits the whole instance.
pub fn segment_distance(es: &ContinuousEdgeSet, query: SegmentQuery, mode: MetricMode) -> Result<f64> {
    let SegmentQuery { x, iota } = SegmentQuery::new(query.x, query.iota)?;
    check_point(es, "x", x)?;
    let (a_hi, b_lo) = (iota * x, (1.0 - iota) * x);
    let hi = match mode {
        MetricMode::ConstrainedInterval => x,
        MetricMode::Unconstrained => es.length(),
    };
    let metric = ContinuousMetric::new(es, 0.0, hi);
    let pos = &metric.pos;
    let zero = Label { dist: 0.0, hops: 0 };
    let mut seeds: Vec<(usize, Label)> = (0..pos.partition_point(|&p| p <= a_hi))
        .map(|i| (i, zero))
        .collect();
    seeds.extend(metric.seeds_from_point(a_hi));
    let s = metric.search(&seeds);
    let mut best = b_lo - a_hi;
    let first_b = pos.partition_point(|&p| p < b_lo);
    let last_b = pos.partition_point(|&p| p <= x);
    for i in first_b..last_b {
        best = best.min(s.label[i].dist);
    }
    if let Some(i) = metric.bracket(b_lo)[0] {
        best = best.min(s.label[i].dist + (b_lo - pos[i]));
    }
    // unconstrained paths may enter the target segment from beyond x
    if last_b < pos.len() {
        best = best.min(s.label[last_b].dist + (pos[last_b] - x));
    }
    Ok(best)
}

use std::collections::{BTreeSet, HashSet};

use lrp_core::census::MicroEdgeSet;

type Jumps = Vec<(i64, i64)>;

/// Jump lists reachable by unit-step walks of at most `budget` steps from
/// the origin, collected and deduplicated after the fact.
pub fn naive_jump_lists(edges: &MicroEdgeSet, budget: u64) -> BTreeSet<Jumps> {
    let mut out = BTreeSet::new();
    let mut visited: HashSet<(i64, u64, Jumps)> = HashSet::new();
    let mut stack = vec![(0i64, budget, Vec::new())];
    while let Some((pos, left, jumps)) = stack.pop() {
        if !visited.insert((pos, left, jumps.clone())) {
            continue;
        }
        out.insert(jumps.clone());
        if left > 0 {
            stack.push((pos - 1, left - 1, jumps.clone()));
            stack.push((pos + 1, left - 1, jumps.clone()));
        }
        let used = |x: i64| jumps.iter().any(|&(a, b)| a == x || b == x);
        for &(a, b) in edges.edges() {
            for (from, to) in [(a, b), (b, a)] {
                if from == pos && !used(from) && !used(to) {
                    let mut next = jumps.clone();
                    next.push((from, to));
                    stack.push((to, left, next));
                }
            }
        }
    }
    out
}

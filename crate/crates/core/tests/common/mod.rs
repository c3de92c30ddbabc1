//! Seeded instance generators and brute-force helpers shared by the
//! integration suites.

#![allow(dead_code)]

use std::sync::Arc;

use creditnet::dp::ScoreSet;
use creditnet::sim::SimRng;
use creditnet::{Configuration, CreditNetwork, VertexId};

pub const CLASS_BUDGET: u64 = 10_000_000;
pub const SUBSET_BUDGET: u64 = 1 << 24;

/// Complete graph on `n` vertices with unit capacities.
pub fn clique(n: usize) -> Arc<CreditNetwork> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            edges.push((a, b, 1));
        }
    }
    Arc::new(CreditNetwork::with_default_labels(n, &edges).unwrap())
}

/// Cycle on `n` vertices with unit capacities.
pub fn cycle(n: usize) -> Arc<CreditNetwork> {
    let edges: Vec<(usize, usize, u64)> = (0..n).map(|v| (v, (v + 1) % n, 1)).collect();
    Arc::new(CreditNetwork::with_default_labels(n, &edges).unwrap())
}

/// Star whose leaves are vertices `0..leaf_caps.len()` and whose hub is the
/// last vertex, with `leaf_caps[i]` on the edge from leaf `i` to the hub.
pub fn star(leaf_caps: &[u64]) -> Arc<CreditNetwork> {
    let hub = leaf_caps.len();
    let edges: Vec<(usize, usize, u64)> = leaf_caps
        .iter()
        .enumerate()
        .map(|(leaf, &cap)| (leaf, hub, cap))
        .collect();
    Arc::new(CreditNetwork::with_default_labels(hub + 1, &edges).unwrap())
}

/// Random connected multigraph: a random spanning tree plus `extra` random
/// chords (self-loops are skipped), capacities drawn from `1..=max_cap`.
pub fn random_connected(
    rng: &mut SimRng,
    n: usize,
    extra: usize,
    max_cap: u64,
) -> Arc<CreditNetwork> {
    assert!(n >= 2, "need at least two vertices");
    let mut edges = Vec::new();
    for v in 1..n {
        let parent = rng.below(v as u64) as usize;
        edges.push((parent, v, 1 + rng.below(max_cap)));
    }
    for _ in 0..extra {
        let a = rng.below(n as u64) as usize;
        let b = rng.below(n as u64) as usize;
        if a != b {
            edges.push((a.min(b), a.max(b), 1 + rng.below(max_cap)));
        }
    }
    Arc::new(CreditNetwork::with_default_labels(n, &edges).unwrap())
}

/// Number of raw configurations, saturating on overflow.
pub fn config_space_size(network: &CreditNetwork) -> u64 {
    network
        .edges()
        .iter()
        .fold(1u64, |acc, e| acc.saturating_mul(e.capacity + 1))
}

/// Random per-vertex score windows that always contain the even split's
/// scores, so the admitted set is never empty.
pub fn windows_around_even(rng: &mut SimRng, network: &Arc<CreditNetwork>) -> ScoreSet {
    let start = Configuration::even_split(Arc::clone(network)).score_vector();
    let mut scores = ScoreSet::unconstrained(network.vertex_count());
    for v in network.vertices() {
        let s = start.get(v);
        match rng.below(3) {
            0 => {}
            1 => {
                let lo = s.saturating_sub(rng.below(2));
                let hi = (s + rng.below(2)).min(network.degree(v));
                scores.interval(v, lo, hi);
            }
            _ => scores.fix(v, s),
        }
    }
    scores
}

/// Brute-force count of admitted score classes: enumerate every raw
/// configuration, group by score vector, keep the vectors every vertex of
/// which is admitted.
pub fn admitted_class_count(
    network: &CreditNetwork,
    scores: &ScoreSet,
    budget: u64,
) -> u64 {
    let by_class = creditnet::classes::enumerate_all_configurations(network, budget).unwrap();
    by_class
        .keys()
        .filter(|s| network.vertices().all(|v| scores.admits(v, s.get(v))))
        .count() as u64
}

/// A uniformly random raw configuration: every edge's capacity is split at
/// an independently uniform point.
pub fn random_configuration(rng: &mut SimRng, network: &Arc<CreditNetwork>) -> Configuration {
    let residuals: Vec<(u64, u64)> = network
        .edges()
        .iter()
        .map(|e| {
            let toward_hi = rng.below(e.capacity + 1);
            (toward_hi, e.capacity - toward_hi)
        })
        .collect();
    Configuration::new(Arc::clone(network), residuals).unwrap()
}

/// Every ordered pair of distinct vertices.
pub fn ordered_pairs(network: &CreditNetwork) -> Vec<(VertexId, VertexId)> {
    let mut pairs = Vec::new();
    for x in network.vertices() {
        for y in network.vertices() {
            if x != y {
                pairs.push((x, y));
            }
        }
    }
    pairs
}

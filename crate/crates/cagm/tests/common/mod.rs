//! Shared fixtures and independent oracles for the integration tests.

use cagm::graph::{AttributedGraph, CommunityPartition};
use rand::rngs::StdRng;
use rand::Rng;

/// Erdős–Rényi-style random graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut StdRng) -> AttributedGraph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    AttributedGraph::from_edges(n, edges).unwrap()
}

/// Random partition into at most `comms` communities (1-based, C0 empty).
pub fn random_partition(n: usize, comms: u32, rng: &mut StdRng) -> CommunityPartition {
    let membership: Vec<u32> = (0..n).map(|_| 1 + rng.gen_range(0..comms)).collect();
    CommunityPartition::from_membership(membership).unwrap()
}

fn toggle(g: &AttributedGraph, u: u32, v: u32) -> AttributedGraph {
    let mut edges: Vec<(u32, u32)> = g
        .edges()
        .iter()
        .copied()
        .filter(|&(a, b)| (a.min(b), a.max(b)) != (u.min(v), u.max(v)))
        .collect();
    if !g.has_edge(u, v) {
        edges.push((u.min(v), u.max(v)));
    }
    AttributedGraph::from_edges(g.n(), edges).unwrap()
}

fn common_in_community(g: &AttributedGraph, p: &CommunityPartition, u: u32, v: u32) -> u64 {
    let c = p.of(u);
    g.neighbors(u)
        .iter()
        .filter(|&&w| w != v && p.of(w) == c && g.has_edge(w, v))
        .count() as u64
}

/// One-step local sensitivity of the intra-triangle count: the largest
/// change a single intra-pair toggle can make, which is that pair's
/// same-community common-neighbour count.
fn onestep_intra(g: &AttributedGraph, p: &CommunityPartition) -> u64 {
    let mut best = 0;
    for u in 0..g.n() as u32 {
        for v in u + 1..g.n() as u32 {
            if p.of(u) == p.of(v) {
                best = best.max(common_in_community(g, p, u, v));
            }
        }
    }
    best
}

/// Brute-force local sensitivity of the intra-triangle count at edit
/// distance one: enumerate every single-edge edit (plus the identity), then
/// take the worst one-step sensitivity among the resulting graphs.
pub fn ls1_intra_oracle(g: &AttributedGraph, p: &CommunityPartition) -> u64 {
    let mut best = onestep_intra(g, p);
    for u in 0..g.n() as u32 {
        for v in u + 1..g.n() as u32 {
            best = best.max(onestep_intra(&toggle(g, u, v), p));
        }
    }
    best
}

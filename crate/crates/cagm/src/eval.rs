//! Fidelity evaluation: how closely a synthetic graph tracks the original.
//!
//! [`evaluate`] produces a [`FidelityReport`] with relative errors on edge,
//! triangle, and clustering totals, Hellinger distances between the degree
//! and local-clustering distributions, the worst per-community attribute
//! distribution distance, and a community-detectability score comparing
//! Louvain partitions of the two graphs found under matched seeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::graph::{triangle_count, wedge_count, AttributedGraph, CommunityPartition};
use crate::{Error, Result};

/// Number of matched Louvain runs behind the detectability score.
const DETECTABILITY_RUNS: usize = 5;

// ---------------------------------------------------------------------------
// distances
// ---------------------------------------------------------------------------

/// Hellinger distance between two distributions over the same support:
/// `(1/sqrt(2)) * sqrt(sum (sqrt(p_i) - sqrt(q_i))^2)`.
pub fn hellinger(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!(
            "distributions have different supports ({} vs {})",
            p.len(),
            q.len()
        )));
    }
    for dist in [p, q] {
        if dist.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::invalid("distribution has a negative entry"));
        }
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "distribution sums to {sum}, expected 1 (tolerance 1e-9)"
            )));
        }
    }
    let s: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    Ok((s / 2.0).sqrt().min(1.0))
}

/// Hellinger distance between sparse distributions keyed by arbitrary
/// ordered support points; missing keys carry zero mass. Both maps must
/// already be normalized.
fn hellinger_sparse<K: Ord + Clone>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut s = 0.0;
    for (key, &a) in p {
        let b = q.get(key).copied().unwrap_or(0.0);
        let d = a.sqrt() - b.sqrt();
        s += d * d;
    }
    for (key, &b) in q {
        if !p.contains_key(key) {
            s += b;
        }
    }
    (s / 2.0).sqrt().min(1.0)
}

/// Relative errors on global structure; `None` marks an undefined ratio
/// (zero denominator in the original graph).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeErrors {
    pub edges: Option<f64>,
    pub triangles: Option<f64>,
    pub clustering: Option<f64>,
}

fn relative(original: f64, synthetic: f64) -> Option<f64> {
    if original == 0.0 {
        None
    } else {
        Some((original - synthetic).abs() / original)
    }
}

fn global_clustering(g: &AttributedGraph) -> Option<f64> {
    let w = wedge_count(g);
    if w == 0 {
        None
    } else {
        Some(3.0 * triangle_count(g) as f64 / w as f64)
    }
}

/// Relative errors of edge count, triangle count, and global clustering
/// coefficient.
pub fn relative_errors(original: &AttributedGraph, synthetic: &AttributedGraph) -> RelativeErrors {
    let clustering = match (global_clustering(original), global_clustering(synthetic)) {
        (Some(c), Some(cs)) => relative(c, cs),
        _ => None,
    };
    RelativeErrors {
        edges: relative(original.edge_count() as f64, synthetic.edge_count() as f64),
        triangles: relative(
            triangle_count(original) as f64,
            triangle_count(synthetic) as f64,
        ),
        clustering,
    }
}

/// Hellinger distance between degree distributions, over the full support
/// `0..n-1`.
pub fn degree_distance(a: &AttributedGraph, b: &AttributedGraph) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::invalid(format!(
            "graphs have different vertex counts ({} vs {})",
            a.n(),
            b.n()
        )));
    }
    let dist = |g: &AttributedGraph| -> Vec<f64> {
        let mut d = vec![0.0; g.n()];
        for v in 0..g.n() as u32 {
            d[g.degree(v) as usize] += 1.0 / g.n() as f64;
        }
        d
    };
    hellinger(&dist(a), &dist(b))
}

/// Local clustering coefficient as an exact reduced fraction
/// `2 links / (d (d - 1))`; vertices of degree below two get `0/1`.
pub(crate) fn lcc_key(links: u64, degree: u64) -> (u64, u64) {
    if degree < 2 {
        return (0, 1);
    }
    let num = 2 * links;
    let den = degree * (degree - 1);
    if num == 0 {
        return (0, 1);
    }
    let g = gcd(num, den);
    (num / g, den / g)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcc_distribution(g: &AttributedGraph) -> BTreeMap<(u64, u64), f64> {
    let mut dist = BTreeMap::new();
    let weight = 1.0 / g.n() as f64;
    for v in 0..g.n() as u32 {
        let nbrs = g.neighbors(v);
        let mut links = 0u64;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if g.has_edge(a, b) {
                    links += 1;
                }
            }
        }
        *dist.entry(lcc_key(links, nbrs.len() as u64)).or_insert(0.0) += weight;
    }
    dist
}

/// Hellinger distance between local-clustering-coefficient distributions;
/// coefficients are compared as exact fractions, so equal values always
/// share a support point.
pub fn lcc_distance(a: &AttributedGraph, b: &AttributedGraph) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::invalid(format!(
            "graphs have different vertex counts ({} vs {})",
            a.n(),
            b.n()
        )));
    }
    Ok(hellinger_sparse(&lcc_distribution(a), &lcc_distribution(b)))
}

/// Worst-case per-community Hellinger distance between the distributions
/// of full attribute vectors.
pub fn rho_attributes(
    a: &AttributedGraph,
    b: &AttributedGraph,
    p: &CommunityPartition,
) -> Result<f64> {
    if a.n() != b.n() || p.n() != a.n() {
        return Err(Error::invalid("graphs and partition disagree on vertex count"));
    }
    if a.k() != b.k() {
        return Err(Error::invalid(format!(
            "graphs have different attribute dimensions ({} vs {})",
            a.k(),
            b.k()
        )));
    }
    let mut worst = 0.0f64;
    for c in 0..p.len() {
        let members = p.community(c);
        if members.is_empty() {
            continue;
        }
        let rows = |g: &AttributedGraph| -> BTreeMap<Vec<u8>, f64> {
            let mut dist = BTreeMap::new();
            let w = 1.0 / members.len() as f64;
            for &v in members {
                *dist.entry(g.attr_row(v).to_vec()).or_insert(0.0) += w;
            }
            dist
        };
        worst = worst.max(hellinger_sparse(&rows(a), &rows(b)));
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// partition agreement
// ---------------------------------------------------------------------------

/// Average F1 between two partitions of the same vertex set: each
/// community's best-match F1 against the other partition, averaged in both
/// directions. Empty communities are skipped.
pub fn avg_f1(p1: &CommunityPartition, p2: &CommunityPartition) -> Result<f64> {
    if p1.n() != p2.n() {
        return Err(Error::invalid(format!(
            "partitions cover different vertex counts ({} vs {})",
            p1.n(),
            p2.n()
        )));
    }
    let one_direction = |from: &CommunityPartition, to: &CommunityPartition| -> Result<f64> {
        let mut total = 0.0;
        let mut count = 0usize;
        for c in 0..from.len() {
            let members = from.community(c);
            if members.is_empty() {
                continue;
            }
            let mut overlap: BTreeMap<u32, usize> = BTreeMap::new();
            for &v in members {
                *overlap.entry(to.of(v)).or_insert(0) += 1;
            }
            let best = overlap
                .iter()
                .map(|(&other, &inter)| {
                    2.0 * inter as f64
                        / (members.len() + to.community(other as usize).len()) as f64
                })
                .fold(0.0f64, f64::max);
            total += best;
            count += 1;
        }
        if count == 0 {
            return Err(Error::invalid("partition has no non-empty communities"));
        }
        Ok(total / count as f64)
    };
    Ok((one_direction(p1, p2)? + one_direction(p2, p1)?) / 2.0)
}

// ---------------------------------------------------------------------------
// Louvain
// ---------------------------------------------------------------------------

/// One level of the Louvain hierarchy: a weighted graph where `self_w[v]`
/// is the total internal weight already folded into supernode `v`.
struct Level {
    adj: Vec<Vec<(u32, f64)>>,
    self_w: Vec<f64>,
}

impl Level {
    fn weighted_degree(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_w[v]
    }
}

/// Modularity-maximizing community detection (Louvain). Randomized in the
/// node visiting order, so runs are reproducible per RNG state. Returns a
/// partition with communities labelled `1..`, leaving the discard community
/// empty.
pub fn louvain<R: Rng + ?Sized>(
    g: &AttributedGraph,
    rng: &mut R,
) -> Result<CommunityPartition> {
    if g.edge_count() == 0 {
        return Err(Error::invalid("empty edge set"));
    }
    let n = g.n();
    let mut level = Level {
        adj: (0..n as u32)
            .map(|v| g.neighbors(v).iter().map(|&w| (w, 1.0)).collect())
            .collect(),
        self_w: vec![0.0; n],
    };
    // membership of the ORIGINAL vertices in the current level's nodes
    let mut assignment: Vec<u32> = (0..n as u32).collect();

    loop {
        let (node_comm, moved) = one_level(&level, rng);
        if !moved {
            break;
        }
        // relabel communities densely in order of first appearance
        let node_count = level.adj.len();
        let mut remap: Vec<u32> = vec![u32::MAX; node_count];
        let mut next = 0u32;
        for &c in &node_comm {
            if remap[c as usize] == u32::MAX {
                remap[c as usize] = next;
                next += 1;
            }
        }
        let dense: Vec<u32> = node_comm.iter().map(|&c| remap[c as usize]).collect();
        for a in assignment.iter_mut() {
            *a = dense[*a as usize];
        }
        level = aggregate(&level, &dense, next as usize);
        if next as usize == node_count {
            break; // nothing merged
        }
    }

    // final labels: 1.. in order of smallest original vertex
    let used = level.adj.len();
    let mut first = vec![u32::MAX; used];
    for (v, &c) in assignment.iter().enumerate() {
        first[c as usize] = first[c as usize].min(v as u32);
    }
    let mut order: Vec<u32> = (0..used as u32).collect();
    order.sort_by_key(|&c| first[c as usize]);
    let mut relabel = vec![0u32; used];
    for (rank, &c) in order.iter().enumerate() {
        relabel[c as usize] = rank as u32 + 1;
    }
    CommunityPartition::from_membership(
        assignment.into_iter().map(|c| relabel[c as usize]).collect(),
    )
}

/// Local-move phase; returns the node-to-community map and whether any node
/// moved.
fn one_level<R: Rng + ?Sized>(level: &Level, rng: &mut R) -> (Vec<u32>, bool) {
    use rand::seq::SliceRandom;
    let n = level.adj.len();
    let m: f64 = (0..n).map(|v| level.weighted_degree(v)).sum::<f64>() / 2.0;
    let k: Vec<f64> = (0..n).map(|v| level.weighted_degree(v)).collect();
    let mut comm: Vec<u32> = (0..n as u32).collect();
    let mut tot: Vec<f64> = k.clone();
    let mut any_moved = false;

    let mut order: Vec<u32> = (0..n as u32).collect();
    for _ in 0..32 {
        order.shuffle(rng);
        let mut moved = false;
        for &v in &order {
            let v = v as usize;
            let c_old = comm[v];
            let mut links: BTreeMap<u32, f64> = BTreeMap::new();
            for &(w, wt) in &level.adj[v] {
                *links.entry(comm[w as usize]).or_insert(0.0) += wt;
            }
            tot[c_old as usize] -= k[v];
            let gain = |c: u32| -> f64 {
                links.get(&c).copied().unwrap_or(0.0) - k[v] * tot[c as usize] / (2.0 * m)
            };
            let stay = gain(c_old);
            let mut best_c = c_old;
            let mut best_gain = stay;
            for &c in links.keys() {
                if c == c_old {
                    continue;
                }
                let g = gain(c);
                if g > best_gain + 1e-12 {
                    best_gain = g;
                    best_c = c;
                }
            }
            tot[best_c as usize] += k[v];
            if best_c != c_old {
                comm[v] = best_c;
                moved = true;
                any_moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    (comm, any_moved)
}

/// Collapses communities into supernodes.
fn aggregate(level: &Level, dense: &[u32], communities: usize) -> Level {
    let mut self_w = vec![0.0; communities];
    let mut cross: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for (v, &cv) in dense.iter().enumerate() {
        self_w[cv as usize] += level.self_w[v];
        for &(w, wt) in &level.adj[v] {
            if (w as usize) < v {
                continue; // each undirected edge once
            }
            let cw = dense[w as usize];
            if cv == cw {
                self_w[cv as usize] += wt;
            } else {
                let key = if cv < cw { (cv, cw) } else { (cw, cv) };
                *cross.entry(key).or_insert(0.0) += wt;
            }
        }
    }
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); communities];
    for (&(a, b), &wt) in &cross {
        adj[a as usize].push((b, wt));
        adj[b as usize].push((a, wt));
    }
    Level { adj, self_w }
}

// ---------------------------------------------------------------------------
// CCDF tables and the report
// ---------------------------------------------------------------------------

/// Complementary CDF over the distinct observed values: for each value,
/// the fraction of observations strictly larger.
pub fn ccdf(values: &[u64]) -> Vec<(u64, f64)> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let j = sorted.partition_point(|&x| x <= v);
        out.push((v, (sorted.len() - j) as f64 / n));
        i = j;
    }
    out
}

/// Fidelity metrics of one synthetic graph against the original.
#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub rho_edges: Option<f64>,
    pub rho_triangles: Option<f64>,
    pub rho_clustering: Option<f64>,
    pub h_degree: f64,
    pub h_lcc: f64,
    pub rho_attributes: f64,
    pub avg_f1: f64,
}

impl FidelityReport {
    pub fn render(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"))
        }
        let mut out = String::new();
        let _ = writeln!(out, "{:<34} {}", "edge count rel. error", opt(self.rho_edges));
        let _ = writeln!(out, "{:<34} {}", "triangle count rel. error", opt(self.rho_triangles));
        let _ = writeln!(out, "{:<34} {}", "global clustering rel. error", opt(self.rho_clustering));
        let _ = writeln!(out, "{:<34} {:.6}", "degree dist. Hellinger", self.h_degree);
        let _ = writeln!(out, "{:<34} {:.6}", "local clustering Hellinger", self.h_lcc);
        let _ = writeln!(out, "{:<34} {:.6}", "attribute dist. worst Hellinger", self.rho_attributes);
        let _ = writeln!(out, "{:<34} {:.6}", "community detectability avg-F1", self.avg_f1);
        out
    }
}

/// Runs the full fidelity suite. The detectability score averages the F1
/// agreement of Louvain partitions found on both graphs under five matched
/// seeds drawn from `rng`.
pub fn evaluate<R: Rng + ?Sized>(
    original: &AttributedGraph,
    synthetic: &AttributedGraph,
    p: &CommunityPartition,
    rng: &mut R,
) -> Result<FidelityReport> {
    if original.n() != synthetic.n() {
        return Err(Error::invalid(format!(
            "graphs have different vertex counts ({} vs {})",
            original.n(),
            synthetic.n()
        )));
    }
    if original.k() != synthetic.k() {
        return Err(Error::invalid(format!(
            "graphs have different attribute dimensions ({} vs {})",
            original.k(),
            synthetic.k()
        )));
    }
    let rel = relative_errors(original, synthetic);
    let h_degree = degree_distance(original, synthetic)?;
    let h_lcc = lcc_distance(original, synthetic)?;
    let rho_attr = rho_attributes(original, synthetic, p)?;

    let mut f1_sum = 0.0;
    for _ in 0..DETECTABILITY_RUNS {
        let seed = rng.next_u64();
        let mut rng_a = ChaCha12Rng::seed_from_u64(seed);
        let mut rng_b = ChaCha12Rng::seed_from_u64(seed);
        let part_a = louvain(original, &mut rng_a)?;
        let part_b = louvain(synthetic, &mut rng_b)?;
        f1_sum += avg_f1(&part_a, &part_b)?;
    }

    Ok(FidelityReport {
        rho_edges: rel.edges,
        rho_triangles: rel.triangles,
        rho_clustering: rel.clustering,
        h_degree,
        h_lcc,
        rho_attributes: rho_attr,
        avg_f1: f1_sum / DETECTABILITY_RUNS as f64,
    })
}

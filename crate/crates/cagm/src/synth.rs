//! Synthetic test fixtures: a planted-partition generator with tunable
//! triangle closure and community-correlated attributes, plus a Chung-Lu
//! null model that preserves degrees while discarding community structure.

use std::collections::HashSet;

use rand::Rng;

use crate::graph::{AttributedGraph, CommunityPartition};
use crate::{Error, Result};

/// Shape of a planted-partition benchmark graph.
#[derive(Debug, Clone)]
pub struct PlantedConfig {
    pub communities: usize,
    pub community_size: usize,
    /// Expected intra-community degree.
    pub intra_degree: f64,
    /// Expected inter-community degree.
    pub inter_degree: f64,
    /// Triangle-closing edges added on top, as a fraction of the intra
    /// edges placed by the random stage.
    pub closure_fraction: f64,
    pub attributes: usize,
    /// Probability of a community's preferred attributes being one.
    pub attribute_affinity: f64,
    /// Probability of the remaining attributes being one.
    pub attribute_base: f64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            communities: 4,
            community_size: 250,
            intra_degree: 18.0,
            inter_degree: 4.0,
            closure_fraction: 0.08,
            attributes: 8,
            attribute_affinity: 0.7,
            attribute_base: 0.1,
        }
    }
}

/// Generates a planted-partition attributed graph together with its ground
/// truth partition (communities `1..=communities`, discard community
/// empty). Attribute `l` is preferred by community `1 + (l mod communities)`,
/// so attribute vectors correlate with community membership.
pub fn planted_partition_graph<R: Rng + ?Sized>(
    cfg: &PlantedConfig,
    rng: &mut R,
) -> Result<(AttributedGraph, CommunityPartition)> {
    if cfg.communities == 0 || cfg.community_size < 2 {
        return Err(Error::invalid(
            "planted graph needs at least one community of at least two vertices",
        ));
    }
    for prob in [cfg.attribute_affinity, cfg.attribute_base] {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::invalid(format!(
                "attribute probability {prob} outside [0, 1]"
            )));
        }
    }
    if cfg.closure_fraction < 0.0 {
        return Err(Error::invalid("negative closure fraction"));
    }
    let n = cfg.communities * cfg.community_size;
    let size = cfg.community_size;
    let membership: Vec<u32> = (0..n).map(|v| 1 + (v / size) as u32).collect();

    let p_in = (cfg.intra_degree / (size - 1) as f64).clamp(0.0, 1.0);
    let p_out = if n > size {
        (cfg.inter_degree / (n - size) as f64).clamp(0.0, 1.0)
    } else {
        0.0
    };

    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut present: HashSet<(u32, u32)> = HashSet::new();
    let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); n];
    let add = |edges: &mut Vec<(u32, u32)>,
                   present: &mut HashSet<(u32, u32)>,
                   nbrs: &mut Vec<Vec<u32>>,
                   u: u32,
                   v: u32| {
        edges.push((u, v));
        present.insert((u, v));
        nbrs[u as usize].push(v);
        nbrs[v as usize].push(u);
    };

    let mut intra_placed = 0u64;
    for c in 0..cfg.communities {
        let base = (c * size) as u32;
        for i in 0..size as u32 {
            for j in i + 1..size as u32 {
                if rng.gen_bool(p_in) {
                    add(&mut edges, &mut present, &mut nbrs, base + i, base + j);
                    intra_placed += 1;
                }
            }
        }
    }
    if p_out > 0.0 {
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if membership[u as usize] != membership[v as usize] && rng.gen_bool(p_out) {
                    add(&mut edges, &mut present, &mut nbrs, u, v);
                }
            }
        }
    }

    // close wedges inside communities to push the triangle count above the
    // degree-sequence expectation
    let closure_target = (cfg.closure_fraction * intra_placed as f64).round() as u64;
    let mut closed = 0u64;
    let mut attempts = 0u64;
    while closed < closure_target && attempts < 60 * closure_target + 100 {
        attempts += 1;
        let v = rng.gen_range(0..n as u32);
        let local: Vec<u32> = nbrs[v as usize]
            .iter()
            .copied()
            .filter(|&w| membership[w as usize] == membership[v as usize])
            .collect();
        if local.len() < 2 {
            continue;
        }
        let a = local[rng.gen_range(0..local.len())];
        let b = local[rng.gen_range(0..local.len())];
        if a == b {
            continue;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if present.contains(&key) {
            continue;
        }
        add(&mut edges, &mut present, &mut nbrs, key.0, key.1);
        closed += 1;
    }

    let k = cfg.attributes;
    let mut x = vec![0u8; n * k];
    for v in 0..n {
        let community = membership[v] as usize - 1;
        for l in 0..k {
            let preferred = l % cfg.communities == community;
            let prob = if preferred {
                cfg.attribute_affinity
            } else {
                cfg.attribute_base
            };
            if rng.gen_bool(prob) {
                x[v * k + l] = 1;
            }
        }
    }

    let g = AttributedGraph::new(n, k, edges, x)?;
    let partition = CommunityPartition::from_membership(membership)?;
    Ok((g, partition))
}

/// Degree-preserving null model: places the same number of distinct edges
/// with endpoint probability proportional to the original degrees, ignoring
/// community structure entirely. Attributes carry over unchanged.
pub fn chung_lu_null<R: Rng + ?Sized>(
    g: &AttributedGraph,
    rng: &mut R,
) -> Result<AttributedGraph> {
    let n = g.n();
    let m = g.edge_count() as u64;
    if m == 0 {
        return AttributedGraph::new(n, g.k(), Vec::new(), g.attr_matrix().to_vec());
    }
    // cumulative degree table for inverse-CDF vertex draws
    let mut cum: Vec<u64> = Vec::with_capacity(n);
    let mut total = 0u64;
    for v in 0..n as u32 {
        total += g.degree(v) as u64;
        cum.push(total);
    }
    let draw = |rng: &mut R| -> u32 {
        let t = rng.gen_range(0..total);
        cum.partition_point(|&c| c <= t) as u32
    };
    let mut present: HashSet<(u32, u32)> = HashSet::new();
    let mut edges = Vec::with_capacity(m as usize);
    let mut attempts = 0u64;
    let cap = 400 * m + 10_000;
    while (edges.len() as u64) < m {
        attempts += 1;
        if attempts > cap {
            return Err(Error::sampler(format!(
                "null model stalled after {attempts} draws with {} of {m} edges placed",
                edges.len()
            )));
        }
        let u = draw(rng);
        let v = draw(rng);
        if u == v {
            continue;
        }
        let key = if u < v { (u, v) } else { (v, u) };
        if present.insert(key) {
            edges.push(key);
        }
    }
    AttributedGraph::new(n, g.k(), edges, g.attr_matrix().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{structural_census, triangle_count};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn planted_graph_has_declared_shape() {
        let cfg = PlantedConfig {
            communities: 3,
            community_size: 40,
            intra_degree: 10.0,
            inter_degree: 2.0,
            closure_fraction: 0.05,
            attributes: 6,
            ..PlantedConfig::default()
        };
        let mut rng = StdRng::seed_from_u64(1);
        let (g, p) = planted_partition_graph(&cfg, &mut rng).unwrap();
        assert_eq!(g.n(), 120);
        assert_eq!(g.k(), 6);
        assert_eq!(p.non_empty().count(), 3);
        let census = structural_census(&g, &p).unwrap();
        let m_intra: u64 = census.m_intra.iter().sum();
        assert!(m_intra > census.m_inter, "intra edges should dominate");
        // expected intra degree ~10: the realized average should be close
        let avg_intra = 2.0 * m_intra as f64 / 120.0;
        assert!((avg_intra - 10.5).abs() < 2.5, "avg intra degree {avg_intra}");
    }

    #[test]
    fn closure_boosts_triangles() {
        let base = PlantedConfig {
            communities: 2,
            community_size: 60,
            intra_degree: 12.0,
            inter_degree: 2.0,
            closure_fraction: 0.0,
            attributes: 0,
            ..PlantedConfig::default()
        };
        let boosted = PlantedConfig {
            closure_fraction: 0.15,
            ..base.clone()
        };
        let mut tri_base = 0u64;
        let mut tri_boost = 0u64;
        for seed in 0..5 {
            let mut rng = StdRng::seed_from_u64(seed);
            let (g, _) = planted_partition_graph(&base, &mut rng).unwrap();
            tri_base += triangle_count(&g);
            let mut rng = StdRng::seed_from_u64(seed);
            let (g, _) = planted_partition_graph(&boosted, &mut rng).unwrap();
            tri_boost += triangle_count(&g);
        }
        assert!(
            tri_boost > tri_base + tri_base / 4,
            "closure edges should add triangles ({tri_base} vs {tri_boost})"
        );
    }

    #[test]
    fn attributes_correlate_with_communities() {
        let cfg = PlantedConfig {
            communities: 2,
            community_size: 100,
            attributes: 4,
            attribute_affinity: 0.9,
            attribute_base: 0.05,
            ..PlantedConfig::default()
        };
        let mut rng = StdRng::seed_from_u64(3);
        let (g, p) = planted_partition_graph(&cfg, &mut rng).unwrap();
        let tx = crate::params::estimate_theta_x(&g, &p).unwrap();
        // attribute 0 preferred by community 1, attribute 1 by community 2
        assert!(tx.probs[1][0] > 0.8);
        assert!(tx.probs[1][1] < 0.15);
        assert!(tx.probs[2][1] > 0.8);
        assert!(tx.probs[2][0] < 0.15);
    }

    #[test]
    fn null_model_preserves_edge_count() {
        let cfg = PlantedConfig {
            communities: 2,
            community_size: 50,
            attributes: 2,
            ..PlantedConfig::default()
        };
        let mut rng = StdRng::seed_from_u64(4);
        let (g, _) = planted_partition_graph(&cfg, &mut rng).unwrap();
        let null = chung_lu_null(&g, &mut rng).unwrap();
        assert_eq!(null.edge_count(), g.edge_count());
        assert_eq!(null.n(), g.n());
        assert_eq!(null.attr_matrix(), g.attr_matrix());
        // zero-degree vertices stay zero degree under the null
        for v in 0..g.n() as u32 {
            if g.degree(v) == 0 {
                assert_eq!(null.degree(v), 0);
            }
        }
    }
}

//! The differential-privacy primitives underneath the private fit.
//!
//! Demonstrates the Laplace mechanism, the exponential mechanism, and the
//! ladder mechanism for triangle counts, including how the ladder's rungs
//! come from local sensitivity at increasing edit distances.

use cagm::dp::{
    exponential_select_index, intra_triangle_ladder, ladder_count, laplace_noise,
    ls_intra_triangles_at_t, ls_total_triangles_at_t, total_triangle_ladder,
};
use cagm::graph::{structural_census, AttributedGraph, CommunityPartition};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn main() -> cagm::Result<()> {
    let mut rng = StdRng::seed_from_u64(11);

    // Laplace mechanism: count 120 with sensitivity 1 at a few budgets.
    println!("laplace mechanism on count = 120, sensitivity 1:");
    for eps in [0.1, 1.0, 10.0] {
        let noisy: Vec<f64> = (0..5)
            .map(|_| laplace_noise(120.0, 1.0, eps, &mut rng).unwrap())
            .collect();
        let shown: Vec<String> = noisy.iter().map(|v| format!("{v:.1}")).collect();
        println!("  eps {eps:>4}: {}", shown.join("  "));
    }

    // Exponential mechanism: higher scores win more often as eps grows.
    let scores = [3.0, 1.0, 0.0];
    println!();
    println!("exponential mechanism over scores {scores:?}, sensitivity 1:");
    for eps in [0.1, 1.0, 5.0] {
        let mut hits = [0u32; 3];
        for _ in 0..10_000 {
            hits[exponential_select_index(&scores, 1.0, eps, &mut rng)?] += 1;
        }
        println!("  eps {eps:>4}: selection counts {hits:?}");
    }

    // Ladder mechanism on a small two-community graph.
    let edges = vec![
        (0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5), (1, 4),
    ];
    let g = AttributedGraph::from_edges(6, edges)?;
    let p = CommunityPartition::from_membership(vec![1, 1, 1, 2, 2, 2])?;
    let census = structural_census(&g, &p)?;
    println!();
    println!(
        "triangle counts: {} intra, {} total",
        census.tri_intra, census.tri_total
    );
    for t in 1..=4 {
        println!(
            "  local sensitivity at distance {t}: intra {}, total {}",
            ls_intra_triangles_at_t(&g, &p, t)?,
            ls_total_triangles_at_t(&g, t)?
        );
    }

    let intra_spec = intra_triangle_ladder(&g, &p, census.tri_intra)?;
    let total_spec = total_triangle_ladder(&g, census.tri_total)?;
    println!();
    println!("ladder mechanism draws (intra / total):");
    for eps in [0.5, 2.0, 16.0] {
        let intra: Vec<u64> = (0..8)
            .map(|_| ladder_count(&intra_spec, eps, &mut rng).unwrap())
            .collect();
        let total: Vec<u64> = (0..8)
            .map(|_| ladder_count(&total_spec, eps, &mut rng).unwrap())
            .collect();
        println!("  eps {eps:>4}: {intra:?} / {total:?}");
    }
    Ok(())
}

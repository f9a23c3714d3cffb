//! Community detection: exact Louvain versus the private divisive search.
//!
//! Generates a planted-partition graph with known ground truth, recovers
//! communities with Louvain, and then runs the differentially private
//! search at a few budgets to show how recovery degrades as epsilon
//! shrinks.

use cagm::community::{dp_partition, modularity, ObjectiveConfig, SearchConfig};
use cagm::eval::{avg_f1, louvain};
use cagm::synth::{planted_partition_graph, PlantedConfig};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn main() -> cagm::Result<()> {
    let mut rng = StdRng::seed_from_u64(7);
    let cfg = PlantedConfig {
        communities: 4,
        community_size: 100,
        intra_degree: 16.0,
        inter_degree: 2.0,
        ..PlantedConfig::default()
    };
    let (g, truth) = planted_partition_graph(&cfg, &mut rng)?;
    println!(
        "planted graph: {} vertices, {} edges, {} communities",
        g.n(),
        g.edge_count(),
        truth.non_empty().count()
    );
    println!("ground-truth modularity: {:.4}", modularity(&g, &truth)?);

    let found = louvain(&g, &mut rng)?;
    println!();
    println!(
        "louvain: {} communities, modularity {:.4}, avg-F1 vs truth {:.4}",
        found.non_empty().count(),
        modularity(&g, &found)?,
        avg_f1(&found, &truth)?
    );

    // The private search trades recovery quality for privacy. The
    // structural weight is 1 here so the objective is plain modularity.
    let objective = ObjectiveConfig::for_graph(&g, 1.0)?;
    let search = SearchConfig::default();
    println!();
    println!("private divisive search:");
    for eps in [0.5, 2.0, 8.0] {
        let p = dp_partition(&g, eps, &objective, &search, &mut rng)?;
        println!(
            "  eps {eps:>4}: {} communities, modularity {:.4}, avg-F1 vs truth {:.4}",
            p.non_empty().count(),
            modularity(&g, &p)?,
            avg_f1(&p, &truth)?
        );
    }
    Ok(())
}

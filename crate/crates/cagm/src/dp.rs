//! Differential-privacy mechanisms.
//!
//! Three building blocks: Laplace noise for counts with known sensitivity,
//! the exponential mechanism for selections scored by a utility with known
//! sensitivity, and a ladder mechanism for triangle counts. The ladder is
//! driven by the local sensitivity of the triangle count at edit distance
//! `t`: for a vertex pair `(i, j)` inside a community `C` with `a` common
//! neighbors in `C` and `b` vertices of `C` adjacent to exactly one of
//! them, flipping `(i, j)` after `t` auxiliary edge edits changes at most
//! `min(a + floor((t + min(t, b)) / 2), |C| - 2)` intra triangles; the
//! ladder takes the maximum over pairs. The whole-graph variant treats the
//! vertex set as one community with bound `n - 2`.
//!
//! All mechanisms draw from a caller-supplied RNG and are deterministic
//! under a fixed seed. Exponentiated utilities are max-shifted, so very
//! large budgets degrade gracefully into argmax/exact behavior instead of
//! overflowing.

use rand::Rng;

use crate::graph::{AttributedGraph, CommunityPartition};
use crate::{Error, Result};

/// Adds Laplace noise with scale `sensitivity / eps` to `value`.
///
/// Sampling inverts the Laplace CDF on one uniform draw, so a seeded RNG
/// reproduces the noise stream exactly.
pub fn laplace_noise<R: Rng + ?Sized>(
    value: f64,
    sensitivity: f64,
    eps: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(sensitivity > 0.0) || !sensitivity.is_finite() {
        return Err(Error::invalid(format!(
            "non-positive sensitivity {sensitivity}"
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("non-positive privacy budget {eps}")));
    }
    let lambda = sensitivity / eps;
    let mut u: f64 = rng.gen();
    while u == 0.0 {
        u = rng.gen();
    }
    let noise = if u < 0.5 {
        lambda * (2.0 * u).ln()
    } else {
        -lambda * (2.0 * (1.0 - u)).ln()
    };
    Ok(value + noise)
}

/// Picks an index with probability proportional to
/// `exp(eps * score / (2 * delta_u))`.
///
/// `eps = 0` degenerates to a uniform choice. Weights are shifted by the
/// maximum score before exponentiation.
pub fn exponential_select_index<R: Rng + ?Sized>(
    scores: &[f64],
    delta_u: f64,
    eps: f64,
    rng: &mut R,
) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::invalid("empty candidate list"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("non-finite candidate score"));
    }
    if !(delta_u > 0.0) || !delta_u.is_finite() {
        return Err(Error::invalid(format!(
            "non-positive utility sensitivity {delta_u}"
        )));
    }
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::invalid(format!("negative privacy budget {eps}")));
    }

    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores
        .iter()
        .map(|&s| (eps * (s - max) / (2.0 * delta_u)).exp())
        .collect();
    Ok(pick_weighted(&weights, rng))
}

/// Like [`exponential_select_index`], returning the candidate itself.
pub fn exponential_select<'a, T, R: Rng + ?Sized>(
    candidates: &'a [T],
    scores: &[f64],
    delta_u: f64,
    eps: f64,
    rng: &mut R,
) -> Result<&'a T> {
    if candidates.len() != scores.len() {
        return Err(Error::invalid(format!(
            "{} candidates but {} scores",
            candidates.len(),
            scores.len()
        )));
    }
    let idx = exponential_select_index(scores, delta_u, eps, rng)?;
    Ok(&candidates[idx])
}

fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0);
    let mut target = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        target -= w;
        if target < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Ladder description for the triangle-count mechanism.
///
/// `rungs[t - 1]` is the ladder value at distance `t`; beyond the stored
/// prefix the value stays at `ceiling`. Values must be non-decreasing and
/// never exceed the ceiling.
#[derive(Debug, Clone)]
pub struct LadderSpec {
    true_count: u64,
    rungs: Vec<u64>,
    ceiling: u64,
}

impl LadderSpec {
    pub fn new(true_count: u64, rungs: Vec<u64>, ceiling: u64) -> Result<Self> {
        let mut prev = 0u64;
        for (i, &r) in rungs.iter().enumerate() {
            if r < prev {
                return Err(Error::invalid(format!(
                    "ladder decreases at distance {}: {} after {}",
                    i + 1,
                    r,
                    prev
                )));
            }
            if r > ceiling {
                return Err(Error::invalid(format!(
                    "ladder value {r} exceeds ceiling {ceiling}"
                )));
            }
            prev = r;
        }
        Ok(LadderSpec {
            true_count,
            rungs,
            ceiling,
        })
    }

    pub fn true_count(&self) -> u64 {
        self.true_count
    }

    pub fn ceiling(&self) -> u64 {
        self.ceiling
    }

    /// Ladder value at distance `t >= 1`.
    pub fn value_at(&self, t: usize) -> u64 {
        assert!(t >= 1, "ladder distance starts at 1");
        self.rungs.get(t - 1).copied().unwrap_or(self.ceiling)
    }

    /// Number of explicitly stored rungs.
    pub fn stored(&self) -> usize {
        self.rungs.len()
    }
}

/// Releases a noisy triangle count through the ladder mechanism.
///
/// Rung `t >= 1` holds the integers whose distance from the true count lies
/// in `(M(t-1), M(t)]` on either side, where `M(t)` is the cumulative
/// ladder value; rung 0 is the true count alone. A rung is selected with
/// probability proportional to its size times `exp(-eps * t / 2)` (the
/// exponential mechanism with utility `-t` and unit sensitivity), then a
/// uniform element of the rung is returned, clamped to zero. The geometric
/// tail past the stored rungs is sampled in closed form, which is exact and
/// sidesteps unbounded enumeration.
pub fn ladder_count<R: Rng + ?Sized>(spec: &LadderSpec, eps: f64, rng: &mut R) -> Result<u64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("non-positive privacy budget {eps}")));
    }

    // one step of the exponential decay between consecutive rungs
    let q = (-eps / 2.0).exp();

    // head: rung 0 plus every rung up to and including the saturation point
    let mut weights = vec![1.0f64];
    let mut cum = vec![0u64]; // cum[t] = M(t)
    let mut t = 1usize;
    let mut decay = q;
    loop {
        let width = spec.value_at(t);
        weights.push(2.0 * width as f64 * decay);
        cum.push(cum[t - 1] + width);
        if t > spec.stored() {
            break; // ladder has reached its constant ceiling
        }
        t += 1;
        decay *= q;
    }
    let t_head = t;

    // mass of the infinite tail t_head+1, t_head+2, ... with constant width
    let tail = if spec.ceiling == 0 || q == 0.0 {
        0.0
    } else {
        2.0 * spec.ceiling as f64 * decay * q / (1.0 - q)
    };
    weights.push(tail);

    let pick = pick_weighted(&weights, rng);
    let c = spec.true_count as i64;

    if pick == 0 {
        return Ok(spec.true_count);
    }

    let (low, width) = if pick <= t_head {
        (cum[pick - 1], spec.value_at(pick))
    } else {
        // geometric offset into the tail: j >= 1 with P(j) proportional to q^j
        let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let j = 1 + (u.ln() / q.ln()).floor() as u64;
        (cum[t_head] + (j - 1) * spec.ceiling, spec.ceiling)
    };
    debug_assert!(width > 0);

    let offset = low + 1 + rng.gen_range(0..width);
    let signed = if rng.gen::<bool>() {
        c + offset as i64
    } else {
        c - offset as i64
    };
    Ok(signed.max(0) as u64)
}

/// Local sensitivity of the intra-community triangle count at distance `t`.
///
/// Maximum over same-community vertex pairs of the pair bound described in
/// the module docs; 0 when no community has two vertices.
pub fn ls_intra_triangles_at_t(
    g: &AttributedGraph,
    p: &CommunityPartition,
    t: u64,
) -> Result<u64> {
    if p.n() != g.n() {
        return Err(Error::invalid(format!(
            "partition covers {} vertices but graph has {}",
            p.n(),
            g.n()
        )));
    }
    let mut best = 0u64;
    for c in p.non_empty() {
        let scope = p.community(c);
        for (a, b) in pair_frontier(g, scope) {
            best = best.max(pair_bound(a, b, t, scope.len() as u64 - 2));
        }
    }
    Ok(best)
}

/// Local sensitivity of the total triangle count at distance `t`: the
/// whole vertex set treated as one community, bound `n - 2`.
pub fn ls_total_triangles_at_t(g: &AttributedGraph, t: u64) -> Result<u64> {
    if g.n() < 2 {
        return Ok(0);
    }
    let scope: Vec<u32> = (0..g.n() as u32).collect();
    let mut best = 0u64;
    for (a, b) in pair_frontier(g, &scope) {
        best = best.max(pair_bound(a, b, t, g.n() as u64 - 2));
    }
    Ok(best)
}

fn pair_bound(a: u64, b: u64, t: u64, cap: u64) -> u64 {
    (a + (t + t.min(b)) / 2).min(cap)
}

/// Pareto frontier of `(common, exclusive)` neighbor counts over vertex
/// pairs within `scope`, endpoints excluded from both counts. The bound is
/// monotone in both coordinates, so dominated pairs can never realize the
/// maximum at any distance.
fn pair_frontier(g: &AttributedGraph, scope: &[u32]) -> Vec<(u64, u64)> {
    let s = scope.len();
    if s < 2 {
        return Vec::new();
    }
    let words = s.div_ceil(64);
    let mut local = vec![u32::MAX; g.n()];
    for (i, &v) in scope.iter().enumerate() {
        local[v as usize] = i as u32;
    }
    let mut rows = vec![0u64; s * words];
    let mut deg = vec![0u64; s];
    for (i, &v) in scope.iter().enumerate() {
        for &w in g.neighbors(v) {
            let j = local[w as usize];
            if j != u32::MAX {
                rows[i * words + (j as usize) / 64] |= 1 << (j % 64);
                deg[i] += 1;
            }
        }
    }

    let mut points: Vec<(u64, u64)> = Vec::new();
    for i in 0..s {
        for j in i + 1..s {
            let mut common = 0u64;
            for w in 0..words {
                common += (rows[i * words + w] & rows[j * words + w]).count_ones() as u64;
            }
            let adj = (rows[i * words + j / 64] >> (j % 64)) & 1;
            let exclusive = deg[i] + deg[j] - 2 * adj - 2 * common;
            points.push((common, exclusive));
        }
    }

    // keep only points not dominated in both coordinates
    points.sort_unstable_by(|x, y| y.cmp(x));
    let mut frontier: Vec<(u64, u64)> = Vec::new();
    let mut best_b = None;
    for (a, b) in points {
        if best_b.map_or(true, |bb| b > bb) {
            frontier.push((a, b));
            best_b = Some(b);
        }
    }
    frontier
}

/// Builds the ladder for the intra-community triangle count: values
/// `ls_intra_triangles_at_t` for `t = 1, ..` until saturation, with the
/// partition-wide ceiling `max_C(|C| - 2)`.
pub fn intra_triangle_ladder(
    g: &AttributedGraph,
    p: &CommunityPartition,
    true_count: u64,
) -> Result<LadderSpec> {
    if p.n() != g.n() {
        return Err(Error::invalid(format!(
            "partition covers {} vertices but graph has {}",
            p.n(),
            g.n()
        )));
    }
    let mut frontiers = Vec::new();
    let mut ceiling = 0u64;
    let mut largest = 0usize;
    for c in p.non_empty() {
        let scope = p.community(c);
        ceiling = ceiling.max((scope.len() as u64).saturating_sub(2));
        largest = largest.max(scope.len());
        if scope.len() >= 2 {
            frontiers.push((pair_frontier(g, scope), scope.len() as u64 - 2));
        }
    }
    build_ladder(frontiers, ceiling, 2 * largest as u64, true_count)
}

/// Builds the ladder for the total triangle count with ceiling `n - 2`.
pub fn total_triangle_ladder(g: &AttributedGraph, true_count: u64) -> Result<LadderSpec> {
    if g.n() < 2 {
        return LadderSpec::new(true_count, Vec::new(), 0);
    }
    let scope: Vec<u32> = (0..g.n() as u32).collect();
    let cap = g.n() as u64 - 2;
    build_ladder(
        vec![(pair_frontier(g, &scope), cap)],
        cap,
        2 * g.n() as u64,
        true_count,
    )
}

fn build_ladder(
    frontiers: Vec<(Vec<(u64, u64)>, u64)>,
    ceiling: u64,
    t_max: u64,
    true_count: u64,
) -> Result<LadderSpec> {
    let mut rungs = Vec::new();
    for t in 1..=t_max {
        let mut v = 0u64;
        for (frontier, cap) in &frontiers {
            for &(a, b) in frontier {
                v = v.max(pair_bound(a, b, t, *cap));
            }
        }
        rungs.push(v);
        if v == ceiling {
            break;
        }
    }
    // drop the saturated suffix; value_at() substitutes the ceiling
    while rungs.last() == Some(&ceiling) {
        rungs.pop();
    }
    LadderSpec::new(true_count, rungs, ceiling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn laplace_rejects_bad_arguments() {
        let mut rng = StdRng::seed_from_u64(1);
        assert!(laplace_noise(0.0, 0.0, 1.0, &mut rng).is_err());
        assert!(laplace_noise(0.0, 1.0, 0.0, &mut rng).is_err());
        assert!(laplace_noise(0.0, 1.0, -2.0, &mut rng).is_err());
    }

    #[test]
    fn laplace_variance_matches_scale() {
        // sensitivity 2 at eps 2 gives scale 1 and variance 2
        let mut rng = StdRng::seed_from_u64(7);
        let n = 400_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let x = laplace_noise(0.0, 2.0, 2.0, &mut rng).unwrap();
            sum += x;
            sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!((var - 2.0).abs() < 0.05, "sample variance {var}");
        assert!(mean.abs() < 0.01, "sample mean {mean}");
    }

    #[test]
    fn exponential_uniform_at_zero_budget() {
        let mut rng = StdRng::seed_from_u64(3);
        let scores = [5.0, -1.0, 100.0];
        let mut hits = [0u32; 3];
        for _ in 0..30_000 {
            hits[exponential_select_index(&scores, 1.0, 0.0, &mut rng).unwrap()] += 1;
        }
        for h in hits {
            assert!((h as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.02);
        }
    }

    #[test]
    fn exponential_two_candidate_odds() {
        // scores {0, du} at eps 2 -> odds e : 1
        let mut rng = StdRng::seed_from_u64(11);
        let du = 0.7;
        let mut wins = 0u32;
        let n = 200_000;
        for _ in 0..n {
            if exponential_select_index(&[0.0, du], du, 2.0, &mut rng).unwrap() == 1 {
                wins += 1;
            }
        }
        let expected = std::f64::consts::E / (1.0 + std::f64::consts::E);
        assert!((wins as f64 / n as f64 - expected).abs() < 0.005);
    }

    #[test]
    fn exponential_argmax_at_huge_budget() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..100 {
            let idx =
                exponential_select_index(&[0.1, 0.9, 0.3], 1.0, 1e9, &mut rng).unwrap();
            assert_eq!(idx, 1);
        }
    }

    #[test]
    fn exponential_rejects_bad_input() {
        let mut rng = StdRng::seed_from_u64(1);
        assert!(exponential_select_index(&[], 1.0, 1.0, &mut rng).is_err());
        assert!(exponential_select_index(&[f64::NAN], 1.0, 1.0, &mut rng).is_err());
        assert!(exponential_select_index(&[1.0], 0.0, 1.0, &mut rng).is_err());
        assert!(exponential_select_index(&[1.0], 1.0, -1.0, &mut rng).is_err());
        let c: [u8; 2] = [1, 2];
        assert!(exponential_select(&c, &[1.0], 1.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn ladder_spec_validation() {
        assert!(LadderSpec::new(5, vec![1, 2, 2, 4], 4).is_ok());
        assert!(LadderSpec::new(5, vec![2, 1], 4).is_err());
        assert!(LadderSpec::new(5, vec![1, 9], 4).is_err());
        let spec = LadderSpec::new(5, vec![1, 2], 7).unwrap();
        assert_eq!(spec.value_at(1), 1);
        assert_eq!(spec.value_at(2), 2);
        assert_eq!(spec.value_at(3), 7);
        assert_eq!(spec.value_at(100), 7);
    }

    #[test]
    fn ladder_exact_at_huge_budget() {
        let mut rng = StdRng::seed_from_u64(2);
        let spec = LadderSpec::new(42, vec![1, 2, 3], 10).unwrap();
        for _ in 0..200 {
            assert_eq!(ladder_count(&spec, 1e6, &mut rng).unwrap(), 42);
        }
    }

    #[test]
    fn ladder_distribution_matches_enumeration() {
        // constant ladder value 1 around true count 6 at eps 1: rung t has
        // two elements and weight 2 e^{-t/2}; enumerate far enough out that
        // the remaining tail is negligible, then compare frequencies.
        let c = 6i64;
        let eps = 1.0;
        let spec = LadderSpec::new(c as u64, Vec::new(), 1).unwrap();

        let mut expect = std::collections::HashMap::new();
        let mut total = 1.0f64;
        *expect.entry(c).or_insert(0.0) += 1.0;
        for t in 1..200i64 {
            let w = (-(eps * t as f64) / 2.0).exp();
            for v in [c - t, c + t] {
                *expect.entry(v.max(0)).or_insert(0.0) += w;
            }
            total += 2.0 * w;
        }

        let mut rng = StdRng::seed_from_u64(19);
        let n = 400_000usize;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            *counts
                .entry(ladder_count(&spec, eps, &mut rng).unwrap() as i64)
                .or_insert(0usize) += 1;
        }

        let mut tv = 0.0;
        let keys: std::collections::BTreeSet<i64> = expect
            .keys()
            .chain(counts.keys())
            .cloned()
            .collect();
        for k in keys {
            let p = expect.get(&k).cloned().unwrap_or(0.0) / total;
            let q = counts.get(&k).cloned().unwrap_or(0) as f64 / n as f64;
            tv += (p - q).abs();
        }
        assert!(tv / 2.0 < 0.01, "total variation {}", tv / 2.0);
    }

    #[test]
    fn ladder_clamps_at_zero() {
        let spec = LadderSpec::new(0, vec![2, 4], 6).unwrap();
        let mut rng = StdRng::seed_from_u64(23);
        let mut saw_positive = false;
        for _ in 0..2000 {
            let v = ladder_count(&spec, 0.5, &mut rng).unwrap();
            saw_positive |= v > 0;
        }
        assert!(saw_positive);
    }

    fn k4_in_community() -> (AttributedGraph, CommunityPartition) {
        let g = AttributedGraph::from_edges(
            4,
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        )
        .unwrap();
        let p = CommunityPartition::from_membership(vec![1, 1, 1, 1]).unwrap();
        (g, p)
    }

    #[test]
    fn ls_on_k4() {
        let (g, p) = k4_in_community();
        // every pair: 2 common neighbors, none exclusive, cap |C| - 2 = 2
        assert_eq!(ls_intra_triangles_at_t(&g, &p, 1).unwrap(), 2);
        assert_eq!(ls_total_triangles_at_t(&g, 1).unwrap(), 2);
    }

    #[test]
    fn ls_on_edgeless_community() {
        let g = AttributedGraph::from_edges(5, vec![]).unwrap();
        let p = CommunityPartition::from_membership(vec![1; 5]).unwrap();
        assert_eq!(ls_intra_triangles_at_t(&g, &p, 1).unwrap(), 0);
        // two edits can manufacture one common neighbor
        assert_eq!(ls_intra_triangles_at_t(&g, &p, 2).unwrap(), 1);
    }

    #[test]
    fn ls_monotone_and_capped() {
        let (g, p) = k4_in_community();
        let ceiling = 2;
        let mut prev = 0;
        for t in 0..30 {
            let v = ls_intra_triangles_at_t(&g, &p, t).unwrap();
            assert!(v >= prev);
            assert!(v <= ceiling);
            prev = v;
        }
        assert_eq!(prev, ceiling);
    }

    /// Brute-force check of the distance-1 bound: enumerate every single
    /// edge edit (plus no edit), then count the same-community common
    /// neighbors of every intra pair.
    fn ls1_oracle(g: &AttributedGraph, p: &CommunityPartition) -> u64 {
        let n = g.n() as u32;
        let mut edits = vec![None];
        for x in 0..n {
            for y in x + 1..n {
                edits.push(Some((x, y)));
            }
        }
        let mut best = 0u64;
        for edit in edits {
            let mut edges: std::collections::BTreeSet<(u32, u32)> =
                g.edges().iter().cloned().collect();
            if let Some(e) = edit {
                if !edges.remove(&e) {
                    edges.insert(e);
                }
            }
            let h = AttributedGraph::from_edges(g.n(), edges.into_iter().collect()).unwrap();
            for i in 0..n {
                for j in i + 1..n {
                    if p.of(i) != p.of(j) {
                        continue;
                    }
                    let count = h
                        .neighbors(i)
                        .iter()
                        .filter(|&&w| h.has_edge(j, w) && p.of(w) == p.of(i))
                        .count() as u64;
                    best = best.max(count);
                }
            }
        }
        best
    }

    #[test]
    fn ls1_matches_oracle_on_random_graphs() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..40 {
            let n = rng.gen_range(3..9usize);
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in u + 1..n as u32 {
                    if rng.gen_bool(0.4) {
                        edges.push((u, v));
                    }
                }
            }
            let g = AttributedGraph::from_edges(n, edges).unwrap();
            let membership: Vec<u32> = (0..n).map(|_| rng.gen_range(0..3u32)).collect();
            let p = CommunityPartition::from_membership(membership).unwrap();
            assert_eq!(
                ls_intra_triangles_at_t(&g, &p, 1).unwrap(),
                ls1_oracle(&g, &p),
            );
        }
    }

    #[test]
    fn ladder_builders_saturate() {
        let (g, p) = k4_in_community();
        let ladder = intra_triangle_ladder(&g, &p, 4).unwrap();
        assert_eq!(ladder.ceiling(), 2);
        assert_eq!(ladder.value_at(1), 2);
        let total = total_triangle_ladder(&g, 4).unwrap();
        assert_eq!(total.ceiling(), 2);
        for t in 1..20 {
            assert!(total.value_at(t) <= total.ceiling());
        }
    }
}

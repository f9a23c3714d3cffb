//! Model parameters and their estimators.
//!
//! [`CAGMParams`] bundles everything the sampler needs: the community
//! partition, the structural targets [`ThetaM`] (per-vertex intra/inter
//! degrees plus triangle counts), the per-community attribute Bernoulli
//! parameters [`ThetaX`], and the per-community bucket distributions of
//! edge-endpoint attribute similarity [`ThetaF`]. [`fit`] estimates all of
//! them exactly from a graph and a partition; [`dp_fit`] estimates them
//! under an (epsilon)-differential-privacy budget split across the five
//! estimation stages and the partition search.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::community::{dp_partition, ObjectiveConfig, SearchConfig};
use crate::dp::{intra_triangle_ladder, ladder_count, laplace_noise, total_triangle_ladder};
use crate::graph::{
    bucket_count, bucket_of, structural_census, AttributedGraph, CommunityPartition,
};
use crate::{Error, Result};

/// Default bucket width for similarity distributions.
pub const DEFAULT_DELTA: f64 = 0.25;

/// Default per-vertex degree cap applied before estimating similarity
/// distributions under privacy.
pub const DEFAULT_DEGREE_CAP: u32 = 100;

// ---------------------------------------------------------------------------
// privacy budget
// ---------------------------------------------------------------------------

/// Fixed split of the total budget, in twelfths, so that shares sum to the
/// total exactly in exact arithmetic.
const BUDGET_SHARES: [(&str, u32); 6] = [
    ("community search", 6),
    ("similarity distributions", 2),
    ("degree sequences", 1),
    ("total triangles", 1),
    ("intra triangles", 1),
    ("attribute probabilities", 1),
];
const BUDGET_DENOMINATOR: u32 = 12;

/// A total privacy budget split into per-stage shares.
#[derive(Debug, Clone, Copy)]
pub struct PrivacyBudget {
    eps_total: f64,
}

impl PrivacyBudget {
    pub fn split(eps_total: f64) -> Result<Self> {
        if !(eps_total > 0.0) || !eps_total.is_finite() {
            return Err(Error::invalid(format!(
                "non-positive privacy budget {eps_total}"
            )));
        }
        Ok(PrivacyBudget { eps_total })
    }

    pub fn eps_total(&self) -> f64 {
        self.eps_total
    }

    fn share(&self, numerator: u32) -> f64 {
        self.eps_total * numerator as f64 / BUDGET_DENOMINATOR as f64
    }

    /// Budget for the community search (6/12).
    pub fn eps_community(&self) -> f64 {
        self.share(6)
    }
    /// Budget for similarity-distribution estimation (2/12).
    pub fn eps_correlation(&self) -> f64 {
        self.share(2)
    }
    /// Budget for degree sequences (1/12).
    pub fn eps_degrees(&self) -> f64 {
        self.share(1)
    }
    /// Budget for the total triangle count (1/12).
    pub fn eps_triangles_total(&self) -> f64 {
        self.share(1)
    }
    /// Budget for the intra-community triangle count (1/12).
    pub fn eps_triangles_intra(&self) -> f64 {
        self.share(1)
    }
    /// Budget for attribute probabilities (1/12).
    pub fn eps_attributes(&self) -> f64 {
        self.share(1)
    }

    pub fn ledger(&self) -> BudgetLedger {
        let entries = BUDGET_SHARES
            .iter()
            .map(|&(label, num)| LedgerEntry {
                label: label.to_string(),
                numerator: num,
                denominator: BUDGET_DENOMINATOR,
                eps: self.share(num),
            })
            .collect();
        BudgetLedger {
            eps_total: self.eps_total,
            entries,
        }
    }
}

/// One stage's share of the budget.
#[derive(Debug, Clone)]
pub struct LedgerEntry {
    pub label: String,
    pub numerator: u32,
    pub denominator: u32,
    pub eps: f64,
}

/// Per-stage budget accounting; the rational shares make the sum exact.
#[derive(Debug, Clone)]
pub struct BudgetLedger {
    pub eps_total: f64,
    pub entries: Vec<LedgerEntry>,
}

impl BudgetLedger {
    /// True when the rational shares sum to exactly one total.
    pub fn is_exact(&self) -> bool {
        let denom = self.entries.first().map_or(1, |e| e.denominator);
        self.entries.iter().all(|e| e.denominator == denom)
            && self.entries.iter().map(|e| e.numerator).sum::<u32>() == denom
    }

    /// Sum of the shares. Computed in rational arithmetic, so an exact
    /// ledger returns `eps_total` bit-for-bit.
    pub fn total(&self) -> f64 {
        let denom = self.entries.first().map_or(1, |e| e.denominator);
        if self.is_exact() {
            self.eps_total
        } else {
            let num: u32 = self.entries.iter().map(|e| e.numerator).sum();
            self.eps_total * num as f64 / denom as f64
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "privacy budget: epsilon = {}", self.eps_total);
        for e in &self.entries {
            let _ = writeln!(
                out,
                "  {:<26} {:>2}/{:<2} = {}",
                e.label, e.numerator, e.denominator, e.eps
            );
        }
        let _ = writeln!(out, "  {:<26} total = {}", "", self.total());
        out
    }
}

// ---------------------------------------------------------------------------
// parameter types
// ---------------------------------------------------------------------------

/// Structural targets: per-vertex intra/inter degrees and triangle counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaM {
    pub d_intra: Vec<u32>,
    pub d_inter: Vec<u32>,
    pub tri_intra: u64,
    pub tri_inter: u64,
}

impl ThetaM {
    /// Per-community intra edge targets `m_C = (1/2) sum_{v in C} d_intra(v)`.
    /// Errors when any community's intra degree sum is odd.
    pub fn m_intra(&self, p: &CommunityPartition) -> Result<Vec<u64>> {
        if self.d_intra.len() != p.n() {
            return Err(Error::invalid(format!(
                "degree vector covers {} vertices but partition has {}",
                self.d_intra.len(),
                p.n()
            )));
        }
        let mut sums = vec![0u64; p.len()];
        for v in 0..p.n() as u32 {
            sums[p.of(v) as usize] += self.d_intra[v as usize] as u64;
        }
        for (c, &s) in sums.iter().enumerate() {
            if s % 2 != 0 {
                return Err(Error::invalid(format!(
                    "community {c} has odd intra degree sum {s}"
                )));
            }
        }
        Ok(sums.into_iter().map(|s| s / 2).collect())
    }

    /// Inter edge target `(1/2) sum_v d_inter(v)`; errors on an odd sum.
    pub fn m_inter(&self) -> Result<u64> {
        let s: u64 = self.d_inter.iter().map(|&d| d as u64).sum();
        if s % 2 != 0 {
            return Err(Error::invalid(format!("odd inter degree sum {s}")));
        }
        Ok(s / 2)
    }

    /// Total edge target.
    pub fn edge_target(&self, p: &CommunityPartition) -> Result<u64> {
        Ok(self.m_intra(p)?.iter().sum::<u64>() + self.m_inter()?)
    }
}

/// Per-community Bernoulli attribute probabilities, `probs[c][l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaX {
    pub probs: Vec<Vec<f64>>,
}

/// Per-community (and inter-community) bucket distributions of endpoint
/// attribute similarity, with bucket width `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaF {
    pub delta: f64,
    pub intra: Vec<Vec<f64>>,
    pub inter: Vec<f64>,
    /// Degree cap used during private estimation, if any.
    pub degree_cap: Option<u32>,
}

impl ThetaF {
    pub fn buckets(&self) -> Result<usize> {
        bucket_count(self.delta)
    }
}

/// Everything needed to sample synthetic graphs.
#[derive(Debug, Clone)]
pub struct CAGMParams {
    pub partition: CommunityPartition,
    pub theta_m: ThetaM,
    pub theta_x: ThetaX,
    pub theta_f: ThetaF,
    pub k: usize,
}

impl CAGMParams {
    pub fn n(&self) -> usize {
        self.partition.n()
    }
}

/// Options for [`dp_fit`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Structural weight of the community objective.
    pub structural_weight: f64,
    /// Divisive search knobs.
    pub search: SearchConfig,
    /// Degree cap applied before similarity-distribution estimation.
    pub degree_cap: u32,
    /// Bucket width for similarity distributions.
    pub delta: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            structural_weight: 0.98,
            search: SearchConfig::default(),
            degree_cap: DEFAULT_DEGREE_CAP,
            delta: DEFAULT_DELTA,
        }
    }
}

// ---------------------------------------------------------------------------
// exact estimators
// ---------------------------------------------------------------------------

fn validate_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!(
            "bucket width {delta} outside (0, 1]"
        )));
    }
    Ok(())
}

fn check_cover(g: &AttributedGraph, p: &CommunityPartition) -> Result<()> {
    if p.n() != g.n() {
        return Err(Error::invalid(format!(
            "partition covers {} vertices but graph has {}",
            p.n(),
            g.n()
        )));
    }
    Ok(())
}

/// Exact per-community attribute frequencies.
pub fn estimate_theta_x(g: &AttributedGraph, p: &CommunityPartition) -> Result<ThetaX> {
    check_cover(g, p)?;
    let k = g.k();
    let mut probs = Vec::with_capacity(p.len());
    for c in 0..p.len() {
        let members = p.community(c);
        let mut row = vec![0.0; k];
        if !members.is_empty() {
            for &v in members {
                for (l, &bit) in g.attr_row(v).iter().enumerate() {
                    row[l] += bit as f64;
                }
            }
            let size = members.len() as f64;
            for x in &mut row {
                *x /= size;
            }
        }
        probs.push(row);
    }
    Ok(ThetaX { probs })
}

/// Private per-community attribute frequencies: Laplace noise with scale
/// `k / eps_x` on each count, clamped to `[0, |C|]`.
pub fn dp_estimate_theta_x<R: Rng + ?Sized>(
    g: &AttributedGraph,
    p: &CommunityPartition,
    eps_x: f64,
    rng: &mut R,
) -> Result<ThetaX> {
    check_cover(g, p)?;
    let k = g.k();
    let mut probs = Vec::with_capacity(p.len());
    for c in 0..p.len() {
        let members = p.community(c);
        let mut row = vec![0.0; k];
        if members.is_empty() || k == 0 {
            probs.push(row);
            continue;
        }
        let mut counts = vec![0u64; k];
        for &v in members {
            for (l, &bit) in g.attr_row(v).iter().enumerate() {
                counts[l] += bit as u64;
            }
        }
        let size = members.len() as f64;
        for l in 0..k {
            let noisy = laplace_noise(counts[l] as f64, k as f64, eps_x, rng)?;
            row[l] = noisy.clamp(0.0, size) / size;
        }
        probs.push(row);
    }
    Ok(ThetaX { probs })
}

fn similarity_histograms(
    g: &AttributedGraph,
    p: &CommunityPartition,
    delta: f64,
) -> Result<(Vec<Vec<u64>>, Vec<u64>)> {
    let buckets = bucket_count(delta)?;
    let mut intra = vec![vec![0u64; buckets]; p.len()];
    let mut inter = vec![0u64; buckets];
    for &(u, v) in g.edges() {
        let b = bucket_of(g.cosine(u, v), delta, buckets);
        if p.of(u) == p.of(v) {
            intra[p.of(u) as usize][b] += 1;
        } else {
            inter[b] += 1;
        }
    }
    Ok((intra, inter))
}

fn normalize_or_uniform(counts: &[f64]) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        counts.iter().map(|&c| c / total).collect()
    } else {
        vec![1.0 / counts.len() as f64; counts.len()]
    }
}

/// Exact similarity-bucket distributions. Communities without intra edges
/// (and the inter class, if empty) fall back to the uniform distribution.
pub fn estimate_theta_f(
    g: &AttributedGraph,
    p: &CommunityPartition,
    delta: f64,
) -> Result<ThetaF> {
    check_cover(g, p)?;
    validate_delta(delta)?;
    let (intra, inter) = similarity_histograms(g, p, delta)?;
    Ok(ThetaF {
        delta,
        intra: intra
            .iter()
            .map(|row| normalize_or_uniform(&row.iter().map(|&c| c as f64).collect::<Vec<_>>()))
            .collect(),
        inter: normalize_or_uniform(&inter.iter().map(|&c| c as f64).collect::<Vec<_>>()),
        degree_cap: None,
    })
}

/// Private similarity-bucket distributions: the graph is first truncated to
/// maximum degree `cap`, then each bucket count receives Laplace noise with
/// scale `2 cap / eps_f` before clamping at zero and normalizing.
pub fn dp_estimate_theta_f<R: Rng + ?Sized>(
    g: &AttributedGraph,
    p: &CommunityPartition,
    delta: f64,
    cap: u32,
    eps_f: f64,
    rng: &mut R,
) -> Result<ThetaF> {
    check_cover(g, p)?;
    validate_delta(delta)?;
    if cap == 0 {
        return Err(Error::invalid("degree cap must be positive"));
    }
    let truncated = truncate_to_max_degree(g, cap)?;
    let (intra, inter) = similarity_histograms(&truncated, p, delta)?;
    let sens = 2.0 * cap as f64;
    let noisy_row = |row: &[u64], rng: &mut R| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(row.len());
        for &c in row {
            out.push(laplace_noise(c as f64, sens, eps_f, rng)?.max(0.0));
        }
        Ok(out)
    };
    let mut intra_dists = Vec::with_capacity(intra.len());
    for (c, row) in intra.iter().enumerate() {
        // A community with fewer than two members cannot have intra edges.
        // The partition is public, so spend no noise on such rows and use
        // the exact estimator's uniform fallback instead.
        if p.community(c).len() < 2 {
            intra_dists.push(normalize_or_uniform(&vec![0.0; row.len()]));
        } else {
            intra_dists.push(normalize_or_uniform(&noisy_row(row, rng)?));
        }
    }
    let inter_dist = normalize_or_uniform(&noisy_row(&inter, rng)?);
    Ok(ThetaF {
        delta,
        intra: intra_dists,
        inter: inter_dist,
        degree_cap: Some(cap),
    })
}

/// Returns a copy of `g` truncated to maximum degree `cap`: vertices are
/// visited in descending id order and, while over the cap, drop the edge to
/// their currently largest-degree neighbor (ties toward the larger id).
pub fn truncate_to_max_degree(g: &AttributedGraph, cap: u32) -> Result<AttributedGraph> {
    if cap == 0 {
        return Err(Error::invalid("degree cap must be positive"));
    }
    let n = g.n();
    let mut adj: Vec<std::collections::BTreeSet<u32>> = vec![Default::default(); n];
    for &(u, v) in g.edges() {
        adj[u as usize].insert(v);
        adj[v as usize].insert(u);
    }
    for v in (0..n as u32).rev() {
        while adj[v as usize].len() > cap as usize {
            let &drop = adj[v as usize]
                .iter()
                .max_by_key(|&&w| (adj[w as usize].len(), w))
                .unwrap();
            adj[v as usize].remove(&drop);
            adj[drop as usize].remove(&v);
        }
    }
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for &v in &adj[u as usize] {
            if u < v {
                edges.push((u, v));
            }
        }
    }
    AttributedGraph::new(n, g.k(), edges, g.attr_matrix().to_vec())
}

// ---------------------------------------------------------------------------
// degree sequences
// ---------------------------------------------------------------------------

/// Pool-adjacent-violators: the least-squares non-decreasing fit to `y`.
pub fn isotonic_non_decreasing(y: &[f64]) -> Vec<f64> {
    #[derive(Clone, Copy)]
    struct Block {
        sum: f64,
        count: usize,
    }
    let mut blocks: Vec<Block> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push(Block { sum: v, count: 1 });
        while blocks.len() >= 2 {
            let b = blocks[blocks.len() - 1];
            let a = blocks[blocks.len() - 2];
            if a.sum / a.count as f64 > b.sum / b.count as f64 {
                blocks.pop();
                let last = blocks.last_mut().unwrap();
                last.sum += b.sum;
                last.count += b.count;
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for b in &blocks {
        let mean = b.sum / b.count as f64;
        out.extend(std::iter::repeat(mean).take(b.count));
    }
    out
}

/// Erdős–Gallai test: can `seq` be realized as a simple graph's degree
/// sequence? The entries may arrive in any order.
pub fn is_graphical(seq: &[u32]) -> bool {
    if seq.is_empty() {
        return true;
    }
    let mut d: Vec<u64> = seq.iter().map(|&x| x as u64).collect();
    d.sort_unstable_by(|a, b| b.cmp(a));
    let total: u64 = d.iter().sum();
    if total % 2 != 0 {
        return false;
    }
    let n = d.len();
    if d[0] as usize >= n {
        return false;
    }
    let mut prefix = vec![0u64; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + d[i];
    }
    for r in 1..=n {
        let lhs = prefix[r];
        // sum_{i>r} min(d_i, r): entries are sorted, so find the split point
        let split = d[r..].partition_point(|&x| x > r as u64);
        let rhs_tail = (split as u64) * r as u64 + (prefix[n] - prefix[r + split]);
        let rhs = (r as u64) * (r as u64 - 1) + rhs_tail;
        if lhs > rhs {
            return false;
        }
    }
    true
}

/// Repairs `seq` into a graphical sequence with even sum: entries are
/// clamped to `cap`, the parity is fixed by bumping the largest-slack entry
/// (or decrementing the largest when all are at the cap), and Erdős–Gallai
/// violations are removed by repeatedly decrementing the two largest
/// entries. Returns the repaired multiset sorted in descending order.
pub fn repair_graphical_even(seq: &[u32], cap: u32) -> Vec<u32> {
    let mut d: Vec<u32> = seq.iter().map(|&x| x.min(cap)).collect();
    d.sort_unstable_by(|a, b| b.cmp(a));
    if d.is_empty() {
        return d;
    }
    let sum: u64 = d.iter().map(|&x| x as u64).sum();
    if sum % 2 != 0 {
        if let Some(last) = d.last_mut().filter(|x| **x < cap) {
            *last += 1;
        } else {
            d[0] -= 1; // everything at the cap, and the cap is >= 1 here
        }
        d.sort_unstable_by(|a, b| b.cmp(a));
    }
    while !is_graphical(&d) {
        if d.len() >= 2 && d[1] >= 1 {
            d[0] -= 1;
            d[1] -= 1;
        } else {
            d[0] = d[0].saturating_sub(2);
        }
        d.sort_unstable_by(|a, b| b.cmp(a));
    }
    d
}

/// Private intra/inter degree sequences.
///
/// Within each community, vertices are ordered by true intra degree (ties by
/// id); the noisy sequence (`Laplace(2/eps_d)` per entry) is made
/// non-decreasing by isotonic regression, rounded, clamped to `[0, |C|-1]`,
/// and repaired to a graphical sequence with even sum. The global inter
/// sequence is noised per vertex, rounded, clamped to `[0, n-1]`, and
/// repaired the same way, with values assigned back by noisy rank.
pub fn dp_degree_sequences<R: Rng + ?Sized>(
    g: &AttributedGraph,
    p: &CommunityPartition,
    eps_d: f64,
    rng: &mut R,
) -> Result<(Vec<u32>, Vec<u32>)> {
    check_cover(g, p)?;
    let census = structural_census(g, p)?;
    let n = g.n();
    let mut d_intra = vec![0u32; n];
    let mut d_inter = vec![0u32; n];

    for c in 0..p.len() {
        let mut members: Vec<u32> = p.community(c).to_vec();
        if members.is_empty() {
            continue;
        }
        members.sort_by_key(|&v| (census.d_intra[v as usize], v));
        let mut noisy = Vec::with_capacity(members.len());
        for &v in &members {
            noisy.push(laplace_noise(
                census.d_intra[v as usize] as f64,
                2.0,
                eps_d,
                rng,
            )?);
        }
        let cap = members.len() as u32 - 1;
        let fitted = isotonic_non_decreasing(&noisy);
        let rounded: Vec<u32> = fitted
            .iter()
            .map(|&x| x.round().clamp(0.0, cap as f64) as u32)
            .collect();
        let mut repaired = repair_graphical_even(&rounded, cap);
        repaired.reverse(); // ascending, matching the sorted member order
        for (&v, &d) in members.iter().zip(&repaired) {
            d_intra[v as usize] = d;
        }
    }

    // inter degrees: noise per vertex, then repair the global sequence and
    // hand values back by noisy rank (ties by id)
    let mut noisy_inter: Vec<(f64, u32)> = Vec::with_capacity(n);
    for v in 0..n as u32 {
        let x = laplace_noise(census.d_inter[v as usize] as f64, 2.0, eps_d, rng)?;
        noisy_inter.push((x, v));
    }
    let cap = n as u32 - 1;
    let rounded: Vec<u32> = noisy_inter
        .iter()
        .map(|&(x, _)| x.round().clamp(0.0, cap as f64) as u32)
        .collect();
    let repaired = repair_graphical_even(&rounded, cap); // descending
    noisy_inter.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (&(_, v), &d) in noisy_inter.iter().zip(&repaired) {
        d_inter[v as usize] = d;
    }

    Ok((d_intra, d_inter))
}

/// Private triangle counts via the ladder mechanism: one ladder for the
/// intra-community count, one for the total; the inter count is the
/// difference, floored at zero.
pub fn dp_triangle_counts<R: Rng + ?Sized>(
    g: &AttributedGraph,
    p: &CommunityPartition,
    eps_total: f64,
    eps_intra: f64,
    rng: &mut R,
) -> Result<(u64, u64)> {
    check_cover(g, p)?;
    let census = structural_census(g, p)?;
    let intra_spec = intra_triangle_ladder(g, p, census.tri_intra)?;
    let total_spec = total_triangle_ladder(g, census.tri_total)?;
    let tri_intra = ladder_count(&intra_spec, eps_intra, rng)?;
    let tri_total = ladder_count(&total_spec, eps_total, rng)?;
    Ok((tri_intra, tri_total.saturating_sub(tri_intra)))
}

// ---------------------------------------------------------------------------
// fitting
// ---------------------------------------------------------------------------

/// Exact fit: census-derived degrees and triangle counts plus exact
/// attribute and similarity estimators.
pub fn fit(g: &AttributedGraph, p: &CommunityPartition, delta: f64) -> Result<CAGMParams> {
    check_cover(g, p)?;
    validate_delta(delta)?;
    let census = structural_census(g, p)?;
    let theta_m = ThetaM {
        d_intra: census.d_intra.clone(),
        d_inter: census.d_inter.clone(),
        tri_intra: census.tri_intra,
        tri_inter: census.tri_inter,
    };
    Ok(CAGMParams {
        partition: p.clone(),
        theta_m,
        theta_x: estimate_theta_x(g, p)?,
        theta_f: estimate_theta_f(g, p, delta)?,
        k: g.k(),
    })
}

/// Private fit under total budget `eps_total`.
///
/// The budget splits 6/12 to the community search, 2/12 to similarity
/// distributions, and 1/12 each to degrees, total triangles, intra
/// triangles, and attribute probabilities. Returns the parameters together
/// with the per-stage ledger.
pub fn dp_fit<R: Rng + ?Sized>(
    g: &AttributedGraph,
    eps_total: f64,
    opts: &FitOptions,
    rng: &mut R,
) -> Result<(CAGMParams, BudgetLedger)> {
    validate_delta(opts.delta)?;
    let budget = PrivacyBudget::split(eps_total)?;
    let cfg = ObjectiveConfig::for_graph(g, opts.structural_weight)?;
    let partition = dp_partition(g, budget.eps_community(), &cfg, &opts.search, rng)?;
    let params = dp_fit_with_partition(g, &partition, &budget, opts, rng)?;
    Ok((params, budget.ledger()))
}

/// Private estimation of everything but the partition, which is supplied.
/// Consumes the non-community shares of `budget` in a fixed order: degrees,
/// triangles, attributes, similarity distributions.
pub fn dp_fit_with_partition<R: Rng + ?Sized>(
    g: &AttributedGraph,
    p: &CommunityPartition,
    budget: &PrivacyBudget,
    opts: &FitOptions,
    rng: &mut R,
) -> Result<CAGMParams> {
    let (d_intra, d_inter) = dp_degree_sequences(g, p, budget.eps_degrees(), rng)?;
    let (tri_intra, tri_inter) = dp_triangle_counts(
        g,
        p,
        budget.eps_triangles_total(),
        budget.eps_triangles_intra(),
        rng,
    )?;
    let theta_x = dp_estimate_theta_x(g, p, budget.eps_attributes(), rng)?;
    let theta_f = dp_estimate_theta_f(
        g,
        p,
        opts.delta,
        opts.degree_cap,
        budget.eps_correlation(),
        rng,
    )?;
    Ok(CAGMParams {
        partition: p.clone(),
        theta_m: ThetaM {
            d_intra,
            d_inter,
            tri_intra,
            tri_inter,
        },
        theta_x,
        theta_f,
        k: g.k(),
    })
}

// ---------------------------------------------------------------------------
// parameter file format
// ---------------------------------------------------------------------------

const PARAMS_HEADER: &str = "cagm-params v1";

fn push_u32_array(out: &mut String, key: &str, values: &[u32]) {
    let _ = write!(out, "{key} =");
    for v in values {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

fn push_f64_array(out: &mut String, key: &str, values: &[f64]) {
    let _ = write!(out, "{key} =");
    for v in values {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

/// Serializes `params` to the versioned key-value text format. Identical
/// parameters always produce identical bytes.
pub fn write_params(path: &Path, params: &CAGMParams) -> Result<()> {
    let p = &params.partition;
    let mut out = String::new();
    let _ = writeln!(out, "{PARAMS_HEADER}");
    let _ = writeln!(out, "n = {}", params.n());
    let _ = writeln!(out, "k = {}", params.k);
    let _ = writeln!(out, "communities = {}", p.len());
    let _ = writeln!(out, "delta = {}", params.theta_f.delta);
    match params.theta_f.degree_cap {
        Some(c) => {
            let _ = writeln!(out, "degree_cap = {c}");
        }
        None => {
            let _ = writeln!(out, "degree_cap = none");
        }
    }
    push_u32_array(&mut out, "membership", p.membership());
    push_u32_array(&mut out, "d_intra", &params.theta_m.d_intra);
    push_u32_array(&mut out, "d_inter", &params.theta_m.d_inter);
    let _ = writeln!(out, "tri_intra = {}", params.theta_m.tri_intra);
    let _ = writeln!(out, "tri_inter = {}", params.theta_m.tri_inter);
    for (c, row) in params.theta_x.probs.iter().enumerate() {
        push_f64_array(&mut out, &format!("theta_x {c}"), row);
    }
    for (c, row) in params.theta_f.intra.iter().enumerate() {
        push_f64_array(&mut out, &format!("theta_f_intra {c}"), row);
    }
    push_f64_array(&mut out, "theta_f_inter", &params.theta_f.inter);
    crate::io::write_file(path, &out)
}

struct ParamsReader<'a> {
    path: &'a Path,
    map: BTreeMap<String, (usize, String)>,
}

impl<'a> ParamsReader<'a> {
    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.path, line, msg)
    }

    fn take(&mut self, key: &str) -> Result<(usize, String)> {
        self.map
            .remove(key)
            .ok_or_else(|| Error::parse(self.path, 0, format!("missing key `{key}`")))
    }

    fn scalar<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (line, raw) = self.take(key)?;
        raw.trim()
            .parse()
            .map_err(|_| self.err(line, format!("bad value `{}` for `{key}`", raw.trim())))
    }

    fn array<T: std::str::FromStr>(&mut self, key: &str, expect: usize) -> Result<Vec<T>> {
        let (line, raw) = self.take(key)?;
        let mut out = Vec::new();
        for tok in raw.split_whitespace() {
            out.push(
                tok.parse()
                    .map_err(|_| self.err(line, format!("bad entry `{tok}` in `{key}`")))?,
            );
        }
        if out.len() != expect {
            return Err(self.err(
                line,
                format!("`{key}` has {} entries, expected {expect}", out.len()),
            ));
        }
        Ok(out)
    }
}

/// Reads parameters written by [`write_params`], validating the version
/// header, array lengths, and distribution normalization.
pub fn read_params(path: &Path) -> Result<CAGMParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == PARAMS_HEADER => {}
        _ => {
            return Err(Error::parse(
                path,
                1,
                format!("missing `{PARAMS_HEADER}` header"),
            ))
        }
    }
    let mut map = BTreeMap::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected `key = value`"))?;
        if map
            .insert(key.trim().to_string(), (idx + 1, value.to_string()))
            .is_some()
        {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("duplicate key `{}`", key.trim()),
            ));
        }
    }
    let mut r = ParamsReader { path, map };

    let n: usize = r.scalar("n")?;
    let k: usize = r.scalar("k")?;
    let n_comms: usize = r.scalar("communities")?;
    let delta: f64 = r.scalar("delta")?;
    validate_delta(delta).map_err(|e| Error::parse(path, 0, e.to_string()))?;
    let degree_cap = {
        let (line, raw) = r.take("degree_cap")?;
        match raw.trim() {
            "none" => None,
            s => Some(
                s.parse::<u32>()
                    .map_err(|_| r.err(line, format!("bad degree cap `{s}`")))?,
            ),
        }
    };

    let membership: Vec<u32> = r.array("membership", n)?;
    let partition = CommunityPartition::from_membership(membership)
        .map_err(|e| Error::parse(path, 0, e.to_string()))?;
    if partition.len() > n_comms {
        return Err(Error::parse(
            path,
            0,
            format!(
                "membership names community {} but `communities` is {n_comms}",
                partition.len() - 1
            ),
        ));
    }
    // trailing empty communities are legal; pad the partition back out
    let partition = if partition.len() < n_comms {
        let mut comms: Vec<Vec<u32>> = (0..partition.len())
            .map(|c| partition.community(c).to_vec())
            .collect();
        comms.resize(n_comms, Vec::new());
        CommunityPartition::from_communities(n, comms)
            .map_err(|e| Error::parse(path, 0, e.to_string()))?
    } else {
        partition
    };

    let d_intra: Vec<u32> = r.array("d_intra", n)?;
    let d_inter: Vec<u32> = r.array("d_inter", n)?;
    let tri_intra: u64 = r.scalar("tri_intra")?;
    let tri_inter: u64 = r.scalar("tri_inter")?;

    let buckets = bucket_count(delta)?;
    let mut theta_x_rows = Vec::with_capacity(n_comms);
    let mut theta_f_rows = Vec::with_capacity(n_comms);
    for c in 0..n_comms {
        let row: Vec<f64> = r.array(&format!("theta_x {c}"), k)?;
        if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::parse(
                path,
                0,
                format!("theta_x {c} has probabilities outside [0, 1]"),
            ));
        }
        theta_x_rows.push(row);
        let dist: Vec<f64> = r.array(&format!("theta_f_intra {c}"), buckets)?;
        check_distribution(path, &format!("theta_f_intra {c}"), &dist)?;
        theta_f_rows.push(dist);
    }
    let inter: Vec<f64> = r.array("theta_f_inter", buckets)?;
    check_distribution(path, "theta_f_inter", &inter)?;

    if let Some((line, _)) = r.map.values().next() {
        let key = r.map.keys().next().unwrap().clone();
        return Err(Error::parse(path, *line, format!("unexpected key `{key}`")));
    }

    Ok(CAGMParams {
        partition,
        theta_m: ThetaM {
            d_intra,
            d_inter,
            tri_intra,
            tri_inter,
        },
        theta_x: ThetaX { probs: theta_x_rows },
        theta_f: ThetaF {
            delta,
            intra: theta_f_rows,
            inter,
            degree_cap,
        },
        k,
    })
}

fn check_distribution(path: &Path, key: &str, dist: &[f64]) -> Result<()> {
    if dist.iter().any(|&p| !(0.0..=1.0 + 1e-9).contains(&p)) {
        return Err(Error::parse(
            path,
            0,
            format!("`{key}` has entries outside [0, 1]"),
        ));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::parse(
            path,
            0,
            format!("`{key}` sums to {sum}, expected 1"),
        ));
    }
    Ok(())
}

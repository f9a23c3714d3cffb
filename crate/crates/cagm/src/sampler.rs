//! Synthetic graph sampling.
//!
//! The edge model draws candidate pairs with probability proportional to
//! the product of target degrees — intra pairs within each community, inter
//! pairs across communities — then enforces triangle targets by replacing
//! the oldest edges with wedge-closing ones, and finally reconnects stray
//! components. [`sample_graph`] wraps the whole pipeline: it samples an
//! attribute matrix, generates one auxiliary edge set to estimate the
//! similarity distribution the raw edge model produces, and then
//! rejection-samples edges so the similarity distribution of the output
//! matches the fitted target.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;

use crate::graph::{bucket_count, bucket_of, AttributedGraph, CommunityPartition};
use crate::params::{CAGMParams, ThetaF, ThetaM, ThetaX};
use crate::{Error, Result};

const PLACEMENT_ATTEMPT_SLACK: u64 = 10_000;
const ENFORCEMENT_PROPOSALS_PER_EDGE: u64 = 50;
const MAX_ALTERNATION_ROUNDS: u32 = 20;
const ACCEPTANCE_CANDIDATE_CAP: u64 = 2_000_000;
const TRIANGLE_TOLERANCE: f64 = 0.98;

#[inline]
fn norm(u: u32, v: u32) -> (u32, u32) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

// ---------------------------------------------------------------------------
// alias sampling
// ---------------------------------------------------------------------------

/// Vose alias table for O(1) draws from a fixed discrete distribution.
struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    fn new(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || !(total > 0.0) || weights.iter().any(|&w| w < 0.0 || !w.is_finite())
        {
            return Err(Error::invalid("alias table needs non-negative weights with a positive sum"));
        }
        let n = weights.len();
        let mut prob: Vec<f64> = weights.iter().map(|&w| w * n as f64 / total).collect();
        let mut alias = vec![0u32; n];
        let mut small: Vec<u32> = Vec::new();
        let mut large: Vec<u32> = Vec::new();
        for (i, &p) in prob.iter().enumerate() {
            if p < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            alias[s as usize] = l;
            prob[l as usize] -= 1.0 - prob[s as usize];
            if prob[l as usize] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for &i in small.iter().chain(large.iter()) {
            prob[i as usize] = 1.0;
        }
        Ok(AliasTable { prob, alias })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let i = rng.gen_range(0..self.prob.len());
        if rng.gen::<f64>() < self.prob[i] {
            i as u32
        } else {
            self.alias[i]
        }
    }
}

/// Per-community alias tables over target intra degrees; `None` when the
/// community is empty or has no positive intra degree.
fn community_aliases(
    theta_m: &ThetaM,
    p: &CommunityPartition,
) -> Result<Vec<Option<(Vec<u32>, AliasTable)>>> {
    let mut out = Vec::with_capacity(p.len());
    for c in 0..p.len() {
        let members: Vec<u32> = p
            .community(c)
            .iter()
            .copied()
            .filter(|&v| theta_m.d_intra[v as usize] > 0)
            .collect();
        if members.is_empty() {
            out.push(None);
            continue;
        }
        let weights: Vec<f64> = members
            .iter()
            .map(|&v| theta_m.d_intra[v as usize] as f64)
            .collect();
        let table = AliasTable::new(&weights)?;
        out.push(Some((members, table)));
    }
    Ok(out)
}

/// Global alias table over target inter degrees.
fn inter_alias(theta_m: &ThetaM) -> Result<Option<(Vec<u32>, AliasTable)>> {
    let members: Vec<u32> = (0..theta_m.d_inter.len() as u32)
        .filter(|&v| theta_m.d_inter[v as usize] > 0)
        .collect();
    if members.is_empty() {
        return Ok(None);
    }
    let weights: Vec<f64> = members
        .iter()
        .map(|&v| theta_m.d_inter[v as usize] as f64)
        .collect();
    Ok(Some((members, AliasTable::new(&weights)?)))
}

// ---------------------------------------------------------------------------
// candidate edge distribution
// ---------------------------------------------------------------------------

/// The raw edge model's candidate-pair distribution: an intra block per
/// community and one inter block, each drawing unordered pairs with
/// probability proportional to the product of target degrees, with blocks
/// mixed by their total probability mass.
pub struct CandidateEdgeDistribution {
    membership: Vec<u32>,
    m_intra: Vec<u64>,
    m_inter: u64,
    blocks: Vec<BlockId>,
    block_table: AliasTable,
    intra: Vec<Option<(Vec<u32>, AliasTable)>>,
    inter: Option<(Vec<u32>, AliasTable)>,
    d_intra: Vec<u32>,
    d_inter: Vec<u32>,
    total_mass: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum BlockId {
    Intra(u32),
    Inter,
}

impl CandidateEdgeDistribution {
    pub fn new(theta_m: &ThetaM, p: &CommunityPartition) -> Result<Self> {
        if theta_m.d_intra.len() != p.n() || theta_m.d_inter.len() != p.n() {
            return Err(Error::invalid("degree vectors do not cover the partition"));
        }
        let m_intra = theta_m.m_intra(p)?;
        let m_inter = theta_m.m_inter()?;
        let intra = community_aliases(theta_m, p)?;
        let inter = inter_alias(theta_m)?;

        let mut blocks = Vec::new();
        let mut masses = Vec::new();
        for c in 0..p.len() {
            if m_intra[c] == 0 {
                continue;
            }
            let Some((members, _)) = &intra[c] else {
                return Err(Error::sampler(format!(
                    "community {c} targets {} intra edges but has no vertex with positive intra degree",
                    m_intra[c]
                )));
            };
            let s: f64 = members
                .iter()
                .map(|&v| theta_m.d_intra[v as usize] as f64)
                .sum();
            let q: f64 = members
                .iter()
                .map(|&v| (theta_m.d_intra[v as usize] as f64).powi(2))
                .sum();
            let pair_sum = (s * s - q) / 2.0;
            if !(pair_sum > 0.0) {
                return Err(Error::sampler(format!(
                    "community {c} targets {} intra edges but has fewer than two vertices with positive intra degree",
                    m_intra[c]
                )));
            }
            blocks.push(BlockId::Intra(c as u32));
            masses.push(pair_sum / m_intra[c] as f64);
        }
        if m_inter > 0 {
            let Some((members, _)) = &inter else {
                return Err(Error::sampler(format!(
                    "{m_inter} inter edges targeted but no vertex has positive inter degree"
                )));
            };
            let s: f64 = members
                .iter()
                .map(|&v| theta_m.d_inter[v as usize] as f64)
                .sum();
            let mut per_comm = vec![0.0; p.len()];
            for &v in members {
                per_comm[p.of(v) as usize] += theta_m.d_inter[v as usize] as f64;
            }
            let cross = (s * s - per_comm.iter().map(|x| x * x).sum::<f64>()) / 2.0;
            if !(cross > 0.0) {
                return Err(Error::sampler(format!(
                    "{m_inter} inter edges targeted but all inter degree sits in one community"
                )));
            }
            blocks.push(BlockId::Inter);
            masses.push(cross / m_inter as f64);
        }
        if blocks.is_empty() {
            return Err(Error::sampler("edge model targets zero edges"));
        }
        let total_mass = masses.iter().sum();
        let block_table = AliasTable::new(&masses)?;
        Ok(CandidateEdgeDistribution {
            membership: p.membership().to_vec(),
            m_intra,
            m_inter,
            blocks,
            block_table,
            intra,
            inter,
            d_intra: theta_m.d_intra.clone(),
            d_inter: theta_m.d_inter.clone(),
            total_mass,
        })
    }

    /// Draws one candidate pair (normalized order).
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(u32, u32)> {
        let block = self.blocks[self.block_table.sample(rng) as usize];
        const CAP: u32 = 1_000_000;
        match block {
            BlockId::Intra(c) => {
                let (members, table) = self.intra[c as usize].as_ref().unwrap();
                for _ in 0..CAP {
                    let v = members[table.sample(rng) as usize];
                    let w = members[table.sample(rng) as usize];
                    if v != w {
                        return Ok(norm(v, w));
                    }
                }
                Err(Error::sampler(format!(
                    "intra candidate sampling stalled in community {c}"
                )))
            }
            BlockId::Inter => {
                let (members, table) = self.inter.as_ref().unwrap();
                for _ in 0..CAP {
                    let v = members[table.sample(rng) as usize];
                    let w = members[table.sample(rng) as usize];
                    if self.membership[v as usize] != self.membership[w as usize] {
                        return Ok(norm(v, w));
                    }
                }
                Err(Error::sampler("inter candidate sampling stalled"))
            }
        }
    }

    /// Unnormalized probability of drawing the pair `(v, w)`; zero when the
    /// pair can never be drawn. Divide by [`Self::total_mass`] to normalize.
    pub fn pair_weight(&self, v: u32, w: u32) -> f64 {
        if v == w {
            return 0.0;
        }
        let (cv, cw) = (
            self.membership[v as usize],
            self.membership[w as usize],
        );
        if cv == cw {
            let c = cv as usize;
            if self.m_intra[c] == 0 || !self.blocks.contains(&BlockId::Intra(cv)) {
                return 0.0;
            }
            self.d_intra[v as usize] as f64 * self.d_intra[w as usize] as f64
                / self.m_intra[c] as f64
        } else {
            if self.m_inter == 0 {
                return 0.0;
            }
            self.d_inter[v as usize] as f64 * self.d_inter[w as usize] as f64
                / self.m_inter as f64
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
}

// ---------------------------------------------------------------------------
// timestamped edge set
// ---------------------------------------------------------------------------

/// An edge set under construction: every edge carries the timestamp of its
/// most recent placement, and intra/inter edges are tracked separately so
/// the enforcement phases can find their oldest edge cheaply.
#[derive(Debug)]
pub struct SyntheticEdgeSet {
    membership: Vec<u32>,
    intra_nbrs: Vec<Vec<u32>>,
    inter_nbrs: Vec<Vec<u32>>,
    stamps: HashMap<(u32, u32), u64>,
    intra_by_stamp: BTreeMap<u64, (u32, u32)>,
    inter_by_stamp: BTreeMap<u64, (u32, u32)>,
    m_intra_by_comm: Vec<u64>,
    next_stamp: u64,
}

impl SyntheticEdgeSet {
    pub fn new(p: &CommunityPartition) -> Self {
        let n = p.n();
        SyntheticEdgeSet {
            membership: p.membership().to_vec(),
            intra_nbrs: vec![Vec::new(); n],
            inter_nbrs: vec![Vec::new(); n],
            stamps: HashMap::new(),
            intra_by_stamp: BTreeMap::new(),
            inter_by_stamp: BTreeMap::new(),
            m_intra_by_comm: vec![0; p.len()],
            next_stamp: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.membership.len()
    }

    pub fn edge_count(&self) -> usize {
        self.stamps.len()
    }

    pub fn m_intra(&self, c: usize) -> u64 {
        self.m_intra_by_comm[c]
    }

    pub fn m_inter(&self) -> u64 {
        self.inter_by_stamp.len() as u64
    }

    pub fn has(&self, u: u32, v: u32) -> bool {
        self.stamps.contains_key(&norm(u, v))
    }

    fn is_intra(&self, u: u32, v: u32) -> bool {
        self.membership[u as usize] == self.membership[v as usize]
    }

    /// Inserts a new edge with a fresh (youngest) timestamp.
    pub fn add(&mut self, u: u32, v: u32) {
        let key = norm(u, v);
        debug_assert!(u != v && !self.stamps.contains_key(&key));
        let stamp = self.next_stamp;
        self.next_stamp += 1;
        self.stamps.insert(key, stamp);
        if self.is_intra(u, v) {
            self.intra_by_stamp.insert(stamp, key);
            self.m_intra_by_comm[self.membership[u as usize] as usize] += 1;
            self.intra_nbrs[key.0 as usize].push(key.1);
            self.intra_nbrs[key.1 as usize].push(key.0);
        } else {
            self.inter_by_stamp.insert(stamp, key);
            self.inter_nbrs[key.0 as usize].push(key.1);
            self.inter_nbrs[key.1 as usize].push(key.0);
        }
    }

    pub fn remove(&mut self, u: u32, v: u32) {
        let key = norm(u, v);
        let stamp = self.stamps.remove(&key).expect("edge not present");
        let lists: &mut Vec<Vec<u32>> = if self.is_intra(u, v) {
            self.intra_by_stamp.remove(&stamp);
            self.m_intra_by_comm[self.membership[u as usize] as usize] -= 1;
            &mut self.intra_nbrs
        } else {
            self.inter_by_stamp.remove(&stamp);
            &mut self.inter_nbrs
        };
        for (a, b) in [(key.0, key.1), (key.1, key.0)] {
            let pos = lists[a as usize].iter().position(|&x| x == b).unwrap();
            lists[a as usize].swap_remove(pos);
        }
    }

    pub fn degree(&self, v: u32) -> usize {
        self.intra_nbrs[v as usize].len() + self.inter_nbrs[v as usize].len()
    }

    pub fn oldest_intra(&self) -> Option<(u32, u32)> {
        self.intra_by_stamp.values().next().copied()
    }

    pub fn oldest_inter(&self) -> Option<(u32, u32)> {
        self.inter_by_stamp.values().next().copied()
    }

    fn random_neighbor<R: Rng + ?Sized>(list: &[u32], rng: &mut R) -> Option<u32> {
        if list.is_empty() {
            None
        } else {
            Some(list[rng.gen_range(0..list.len())])
        }
    }

    pub fn random_intra_neighbor<R: Rng + ?Sized>(&self, v: u32, rng: &mut R) -> Option<u32> {
        Self::random_neighbor(&self.intra_nbrs[v as usize], rng)
    }

    pub fn random_inter_neighbor<R: Rng + ?Sized>(&self, v: u32, rng: &mut R) -> Option<u32> {
        Self::random_neighbor(&self.inter_nbrs[v as usize], rng)
    }

    /// Common neighbors of `u` and `v` inside their own community, i.e. the
    /// number of intra triangles the edge `(u, v)` would close.
    pub fn common_in_community(&self, u: u32, v: u32) -> u64 {
        let (a, b) = if self.intra_nbrs[u as usize].len() <= self.intra_nbrs[v as usize].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.intra_nbrs[a as usize]
            .iter()
            .filter(|&&w| self.stamps.contains_key(&norm(w, b)))
            .count() as u64
    }

    /// Common neighbors of `u` and `v` anywhere in the graph.
    pub fn common_global(&self, u: u32, v: u32) -> u64 {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.intra_nbrs[a as usize]
            .iter()
            .chain(self.inter_nbrs[a as usize].iter())
            .filter(|&&w| self.stamps.contains_key(&norm(w, b)))
            .count() as u64
    }

    pub fn count_intra_triangles(&self) -> u64 {
        let sum: u64 = self
            .intra_by_stamp
            .values()
            .map(|&(u, v)| self.common_in_community(u, v))
            .sum();
        debug_assert_eq!(sum % 3, 0);
        sum / 3
    }

    pub fn count_total_triangles(&self) -> u64 {
        let sum: u64 = self
            .intra_by_stamp
            .values()
            .chain(self.inter_by_stamp.values())
            .map(|&(u, v)| self.common_global(u, v))
            .sum();
        sum / 3
    }

    /// Edges in normalized sorted order.
    pub fn edges_sorted(&self) -> Vec<(u32, u32)> {
        let mut edges: Vec<(u32, u32)> = self.stamps.keys().copied().collect();
        edges.sort_unstable();
        edges
    }

    /// Connected components over vertices with at least one edge, largest
    /// first (ties toward the component with the smallest vertex id). Each
    /// component lists its members in ascending order.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for start in 0..n as u32 {
            if seen[start as usize] || self.degree(start) == 0 {
                continue;
            }
            let mut queue = vec![start];
            seen[start as usize] = true;
            let mut comp = Vec::new();
            while let Some(v) = queue.pop() {
                comp.push(v);
                for &w in self.intra_nbrs[v as usize]
                    .iter()
                    .chain(self.inter_nbrs[v as usize].iter())
                {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        queue.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        comps
    }
}

// ---------------------------------------------------------------------------
// edge-set generation and triangle enforcement
// ---------------------------------------------------------------------------

/// Places the target number of distinct edges: `m_C` inside each community
/// (endpoints drawn proportionally to target intra degree) and the inter
/// target across communities (drawn proportionally to target inter degree).
pub fn gen_initial_edge_set<R: Rng + ?Sized>(
    theta_m: &ThetaM,
    p: &CommunityPartition,
    rng: &mut R,
) -> Result<SyntheticEdgeSet> {
    if theta_m.d_intra.len() != p.n() || theta_m.d_inter.len() != p.n() {
        return Err(Error::invalid("degree vectors do not cover the partition"));
    }
    let m_intra = theta_m.m_intra(p)?;
    let m_inter = theta_m.m_inter()?;
    let intra = community_aliases(theta_m, p)?;
    let inter = inter_alias(theta_m)?;
    let mut eset = SyntheticEdgeSet::new(p);

    for c in 0..p.len() {
        let target = m_intra[c];
        if target == 0 {
            continue;
        }
        let Some((members, table)) = &intra[c] else {
            return Err(Error::sampler(format!(
                "community {c} targets {target} intra edges but has no vertex with positive intra degree"
            )));
        };
        let s = members.len() as u64;
        if s * (s - 1) / 2 < target {
            return Err(Error::sampler(format!(
                "community {c} targets {target} intra edges but only {} distinct pairs exist",
                s * (s - 1) / 2
            )));
        }
        let mut placed = 0u64;
        let mut attempts = 0u64;
        let cap = 200 * target + PLACEMENT_ATTEMPT_SLACK;
        while placed < target {
            attempts += 1;
            if attempts > cap {
                return Err(Error::sampler(format!(
                    "intra edge placement stalled in community {c}: placed {placed} of {target}"
                )));
            }
            let v = members[table.sample(rng) as usize];
            let w = members[table.sample(rng) as usize];
            if v == w || eset.has(v, w) {
                continue;
            }
            eset.add(v, w);
            placed += 1;
        }
    }

    if m_inter > 0 {
        let Some((members, table)) = &inter else {
            return Err(Error::sampler(format!(
                "{m_inter} inter edges targeted but no vertex has positive inter degree"
            )));
        };
        let mut per_comm: HashMap<u32, u64> = HashMap::new();
        for &v in members {
            *per_comm.entry(p.of(v)).or_default() += 1;
        }
        let t: u64 = members.len() as u64;
        let same: u64 = per_comm.values().map(|&x| x * x).sum();
        if (t * t - same) / 2 < m_inter {
            return Err(Error::sampler(format!(
                "{m_inter} inter edges targeted but only {} distinct cross-community pairs exist",
                (t * t - same) / 2
            )));
        }
        let mut placed = 0u64;
        let mut attempts = 0u64;
        let cap = 200 * m_inter + PLACEMENT_ATTEMPT_SLACK;
        while placed < m_inter {
            attempts += 1;
            if attempts > cap {
                return Err(Error::sampler(format!(
                    "inter edge placement stalled: placed {placed} of {m_inter}"
                )));
            }
            let v = members[table.sample(rng) as usize];
            let w = members[table.sample(rng) as usize];
            if p.of(v) == p.of(w) || eset.has(v, w) {
                continue;
            }
            eset.add(v, w);
            placed += 1;
        }
    }

    Ok(eset)
}

/// Counters from one run of the triangle-enforcement phases.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnforcementDiagnostics {
    pub intra_proposals: u64,
    pub intra_accepted: u64,
    pub inter_proposals: u64,
    pub inter_accepted: u64,
}

impl EnforcementDiagnostics {
    fn absorb(&mut self, other: EnforcementDiagnostics) {
        self.intra_proposals += other.intra_proposals;
        self.intra_accepted += other.intra_accepted;
        self.inter_proposals += other.inter_proposals;
        self.inter_accepted += other.inter_accepted;
    }
}

/// Triangle enforcement: phase one walks two intra steps from a degree-
/// weighted start vertex and proposes closing the wedge, swapping out the
/// oldest intra edge when that increases the community-restricted common
/// neighbor count; phase two does the same with one inter and one intra
/// step, the oldest inter edge, and unrestricted counts. Rejected proposals
/// re-stamp the oldest edge as youngest. Returns the edge set once both
/// triangle targets are met or the proposal budgets are spent.
pub fn get_final_edge_set<R: Rng + ?Sized>(
    mut eset: SyntheticEdgeSet,
    theta_m: &ThetaM,
    p: &CommunityPartition,
    rng: &mut R,
) -> Result<(SyntheticEdgeSet, EnforcementDiagnostics)> {
    let diag = enforce_triangles(&mut eset, theta_m, p, rng)?;
    Ok((eset, diag))
}

fn enforce_triangles<R: Rng + ?Sized>(
    eset: &mut SyntheticEdgeSet,
    theta_m: &ThetaM,
    p: &CommunityPartition,
    rng: &mut R,
) -> Result<EnforcementDiagnostics> {
    let mut diag = EnforcementDiagnostics::default();
    let intra_tables = community_aliases(theta_m, p)?;
    let budget = ENFORCEMENT_PROPOSALS_PER_EDGE * eset.edge_count().max(1) as u64;

    // phase one: intra triangles
    let mut mu = eset.count_intra_triangles();
    let active: Vec<usize> = (0..p.len()).filter(|&c| intra_tables[c].is_some()).collect();
    if !active.is_empty() {
        while mu < theta_m.tri_intra && diag.intra_proposals < budget {
            diag.intra_proposals += 1;
            let c = active[rng.gen_range(0..active.len())];
            if eset.m_intra(c) == 0 {
                continue;
            }
            let (members, table) = intra_tables[c].as_ref().unwrap();
            let v1 = members[table.sample(rng) as usize];
            let Some(v2) = eset.random_intra_neighbor(v1, rng) else {
                continue;
            };
            let Some(v3) = eset.random_intra_neighbor(v2, rng) else {
                continue;
            };
            if v3 == v1 || eset.has(v1, v3) {
                continue;
            }
            let Some((a, b)) = eset.oldest_intra() else {
                break;
            };
            let n_prev = eset.common_in_community(a, b);
            eset.remove(a, b);
            let n_new = eset.common_in_community(v1, v3);
            if n_new > n_prev {
                eset.add(v1, v3);
                mu += n_new - n_prev;
                diag.intra_accepted += 1;
            } else {
                eset.add(a, b); // back in, youngest stamp
            }
        }
    }

    // phase two: inter triangles, tracked as total minus intra (phase-two
    // swaps replace inter edges only, so the intra count stays put)
    let inter_table = inter_alias(theta_m)?;
    let mut total = eset.count_total_triangles();
    debug_assert!(total >= mu);
    if let Some((members, table)) = &inter_table {
        while total - mu < theta_m.tri_inter && diag.inter_proposals < budget {
            diag.inter_proposals += 1;
            let v1 = members[table.sample(rng) as usize];
            let Some(v2) = eset.random_inter_neighbor(v1, rng) else {
                continue;
            };
            let Some(v3) = eset.random_intra_neighbor(v2, rng) else {
                continue;
            };
            debug_assert!(!eset.is_intra(v1, v3));
            if v3 == v1 || eset.has(v1, v3) {
                continue;
            }
            let Some((a, b)) = eset.oldest_inter() else {
                break;
            };
            let n_prev = eset.common_global(a, b);
            eset.remove(a, b);
            let n_new = eset.common_global(v1, v3);
            if n_new > n_prev {
                eset.add(v1, v3);
                total += n_new - n_prev;
                diag.inter_accepted += 1;
            } else {
                eset.add(a, b);
            }
        }
    }

    Ok(diag)
}

/// Reconnects the realized edge set: while more than one component exists
/// (over vertices with at least one edge), swap a random edge `(a, b)` of
/// the main component for `(u, a)`, where `u` is the smallest vertex of the
/// next component. Returns the number of swaps performed.
pub fn reconnect<R: Rng + ?Sized>(eset: &mut SyntheticEdgeSet, rng: &mut R) -> u64 {
    let mut swaps = 0u64;
    let initial = eset.components().len() as u64;
    let cap = 20 * initial + 20;
    loop {
        let comps = eset.components();
        if comps.len() <= 1 || swaps >= cap {
            return swaps;
        }
        let main: std::collections::HashSet<u32> = comps[0].iter().copied().collect();
        let u = comps[1][0];
        let main_edges: Vec<(u32, u32)> = eset
            .intra_by_stamp
            .values()
            .chain(eset.inter_by_stamp.values())
            .copied()
            .filter(|&(a, b)| main.contains(&a) && main.contains(&b))
            .collect();
        if main_edges.is_empty() {
            return swaps;
        }
        let (a, b) = main_edges[rng.gen_range(0..main_edges.len())];
        let keep = if rng.gen_bool(0.5) { a } else { b };
        eset.remove(a, b);
        eset.add(u, keep);
        swaps += 1;
    }
}

/// Diagnostics from one full edge-model sample.
#[derive(Debug, Clone, Default)]
pub struct CpgmDiagnostics {
    pub enforcement: EnforcementDiagnostics,
    pub alternation_rounds: u32,
    pub reconnect_swaps: u64,
    pub connected: bool,
    pub intra_triangles: u64,
    pub total_triangles: u64,
    pub tri_intra_target: u64,
    pub tri_inter_target: u64,
}

impl CpgmDiagnostics {
    /// True when the final total triangle count lies within the enforcement
    /// tolerance of the target.
    pub fn triangles_within_tolerance(&self) -> bool {
        let target = self.tri_intra_target + self.tri_inter_target;
        if target == 0 {
            return true;
        }
        self.total_triangles as f64 >= TRIANGLE_TOLERANCE * target as f64
    }
}

/// Samples one edge set from the community-preserving edge model: initial
/// degree-weighted placement, triangle enforcement, then alternating
/// reconnection and re-enforcement until the graph is connected and the
/// total triangle count stays within tolerance (or the round cap is hit).
pub fn sample_cpgm<R: Rng + ?Sized>(
    theta_m: &ThetaM,
    p: &CommunityPartition,
    rng: &mut R,
) -> Result<(SyntheticEdgeSet, CpgmDiagnostics)> {
    let eset = gen_initial_edge_set(theta_m, p, rng)?;
    let (mut eset, mut enforcement) = get_final_edge_set(eset, theta_m, p, rng)?;
    let target_total = theta_m.tri_intra + theta_m.tri_inter;

    let mut rounds = 0u32;
    let mut reconnect_swaps = 0u64;
    loop {
        reconnect_swaps += reconnect(&mut eset, rng);
        let total = eset.count_total_triangles();
        let ok = target_total == 0 || total as f64 >= TRIANGLE_TOLERANCE * target_total as f64;
        if ok || rounds >= MAX_ALTERNATION_ROUNDS {
            break;
        }
        rounds += 1;
        enforcement.absorb(enforce_triangles(&mut eset, theta_m, p, rng)?);
    }

    let diag = CpgmDiagnostics {
        enforcement,
        alternation_rounds: rounds,
        reconnect_swaps,
        connected: eset.components().len() <= 1,
        intra_triangles: eset.count_intra_triangles(),
        total_triangles: eset.count_total_triangles(),
        tri_intra_target: theta_m.tri_intra,
        tri_inter_target: theta_m.tri_inter,
    };
    Ok((eset, diag))
}

// ---------------------------------------------------------------------------
// attributes and similarity-matched edge acceptance
// ---------------------------------------------------------------------------

/// Samples a fresh attribute matrix: each member of community `c` draws
/// attribute `l` from Bernoulli(`theta_x.probs[c][l]`).
pub fn sample_attribute_matrix<R: Rng + ?Sized>(
    theta_x: &ThetaX,
    p: &CommunityPartition,
    k: usize,
    rng: &mut R,
) -> Result<Vec<u8>> {
    if theta_x.probs.len() != p.len() {
        return Err(Error::invalid(format!(
            "attribute model covers {} communities but partition has {}",
            theta_x.probs.len(),
            p.len()
        )));
    }
    let mut x = vec![0u8; p.n() * k];
    for c in 0..p.len() {
        let row = &theta_x.probs[c];
        if p.community(c).is_empty() {
            continue;
        }
        if row.len() != k {
            return Err(Error::invalid(format!(
                "attribute model row {c} has {} entries, expected {k}",
                row.len()
            )));
        }
        if row.iter().any(|&q| !(0.0..=1.0).contains(&q)) {
            return Err(Error::invalid(format!(
                "attribute model row {c} has probabilities outside [0, 1]"
            )));
        }
        for &v in p.community(c) {
            for (l, &q) in row.iter().enumerate() {
                if rng.gen::<f64>() < q {
                    x[v as usize * k + l] = 1;
                }
            }
        }
    }
    Ok(x)
}

/// Smoothed per-community and inter similarity-bucket distributions of an
/// edge list, with add-one smoothing so every bucket keeps positive mass.
pub fn empirical_bucket_distributions(
    edges: &[(u32, u32)],
    attrs: &AttributedGraph,
    p: &CommunityPartition,
    delta: f64,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let buckets = bucket_count(delta)?;
    let mut intra = vec![vec![0u64; buckets]; p.len()];
    let mut inter = vec![0u64; buckets];
    for &(u, v) in edges {
        let b = bucket_of(attrs.cosine(u, v), delta, buckets);
        if p.of(u) == p.of(v) {
            intra[p.of(u) as usize][b] += 1;
        } else {
            inter[b] += 1;
        }
    }
    let smooth = |counts: &[u64]| -> Vec<f64> {
        let total: u64 = counts.iter().sum();
        let denom = total as f64 + counts.len() as f64;
        counts.iter().map(|&c| (c + 1) as f64 / denom).collect()
    };
    Ok((intra.iter().map(|r| smooth(r)).collect(), smooth(&inter)))
}

/// Per-bucket acceptance probabilities: the ratio of target to empirical
/// bucket mass, scaled so the largest ratio accepts with probability one.
pub struct AcceptanceTables {
    pub intra: Vec<Vec<f64>>,
    pub inter: Vec<f64>,
    pub sup_ratio: f64,
    delta: f64,
}

pub fn build_acceptance_tables(
    theta_f: &ThetaF,
    empirical_intra: &[Vec<f64>],
    empirical_inter: &[f64],
) -> Result<AcceptanceTables> {
    let buckets = theta_f.buckets()?;
    if empirical_intra.len() != theta_f.intra.len()
        || empirical_inter.len() != buckets
        || theta_f.inter.len() != buckets
        || empirical_intra.iter().any(|r| r.len() != buckets)
        || theta_f.intra.iter().any(|r| r.len() != buckets)
    {
        return Err(Error::invalid(
            "similarity distribution tables disagree on shape",
        ));
    }
    let ratio_row = |target: &[f64], emp: &[f64]| -> Result<Vec<f64>> {
        target
            .iter()
            .zip(emp)
            .map(|(&t, &e)| {
                if !(e > 0.0) {
                    return Err(Error::invalid(
                        "empirical similarity distribution has an empty bucket",
                    ));
                }
                Ok(t / e)
            })
            .collect()
    };
    let mut intra = Vec::with_capacity(theta_f.intra.len());
    for (t, e) in theta_f.intra.iter().zip(empirical_intra) {
        intra.push(ratio_row(t, e)?);
    }
    let inter = ratio_row(&theta_f.inter, empirical_inter)?;
    let sup_ratio = intra
        .iter()
        .flatten()
        .chain(inter.iter())
        .fold(0.0f64, |acc, &r| acc.max(r));
    if !(sup_ratio > 0.0) {
        return Err(Error::invalid("similarity distributions are degenerate"));
    }
    for row in intra.iter_mut() {
        for r in row.iter_mut() {
            *r /= sup_ratio;
        }
    }
    let inter: Vec<f64> = inter.into_iter().map(|r| r / sup_ratio).collect();
    Ok(AcceptanceTables {
        intra,
        inter,
        sup_ratio,
        delta: theta_f.delta,
    })
}

impl AcceptanceTables {
    /// Acceptance probability for a candidate pair with the given
    /// community labels and similarity bucket.
    pub fn gamma(&self, cu: u32, cv: u32, bucket: usize) -> f64 {
        if cu == cv {
            self.intra[cu as usize][bucket]
        } else {
            self.inter[bucket]
        }
    }
}

/// Draws candidate pairs until one passes the similarity acceptance test.
pub fn sample_accepted_pair<R: Rng + ?Sized>(
    dist: &CandidateEdgeDistribution,
    tables: &AcceptanceTables,
    attrs: &AttributedGraph,
    rng: &mut R,
) -> Result<(u32, u32)> {
    let buckets = bucket_count(tables.delta)?;
    for _ in 0..ACCEPTANCE_CANDIDATE_CAP {
        let (v, w) = dist.sample_pair(rng)?;
        let b = bucket_of(attrs.cosine(v, w), tables.delta, buckets);
        let gamma = tables.gamma(
            dist.membership[v as usize],
            dist.membership[w as usize],
            b,
        );
        if rng.gen::<f64>() < gamma {
            return Ok((v, w));
        }
    }
    Err(Error::sampler(
        "similarity acceptance sampling stalled; target and raw similarity distributions may be too far apart",
    ))
}

/// Diagnostics from one [`sample_graph`] call.
#[derive(Debug, Clone, Default)]
pub struct SampleDiagnostics {
    pub cpgm: CpgmDiagnostics,
    pub candidate_draws: u64,
    pub accepted_draws: u64,
    pub duplicate_draws: u64,
    pub edge_target: u64,
}

/// Samples one synthetic attributed graph from fitted parameters.
///
/// The attribute matrix is drawn first; one auxiliary edge-model sample
/// (with those attributes) estimates the similarity distribution the raw
/// model produces, and the output edges are then rejection-sampled so their
/// similarity distribution matches the fitted target, drawing until the
/// target edge count of distinct edges is reached.
pub fn sample_graph<R: Rng + ?Sized>(
    params: &CAGMParams,
    rng: &mut R,
) -> Result<(AttributedGraph, SampleDiagnostics)> {
    let p = &params.partition;
    let n = p.n();
    let k = params.k;
    let x = sample_attribute_matrix(&params.theta_x, p, k, rng)?;
    let attrs = AttributedGraph::new(n, k, Vec::new(), x.clone())?;

    let (aux, cpgm) = sample_cpgm(&params.theta_m, p, rng)?;
    let (emp_intra, emp_inter) =
        empirical_bucket_distributions(&aux.edges_sorted(), &attrs, p, params.theta_f.delta)?;
    let tables = build_acceptance_tables(&params.theta_f, &emp_intra, &emp_inter)?;
    let dist = CandidateEdgeDistribution::new(&params.theta_m, p)?;

    let target = params.theta_m.edge_target(p)?;
    let max_pairs = n as u64 * (n as u64 - 1) / 2;
    if target > max_pairs {
        return Err(Error::invalid(format!(
            "edge target {target} exceeds the {max_pairs} distinct pairs on {n} vertices"
        )));
    }

    let buckets = bucket_count(params.theta_f.delta)?;
    let mut chosen: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut diag = SampleDiagnostics {
        cpgm,
        edge_target: target,
        ..Default::default()
    };
    let draw_cap = 200 * target + 1_000_000;
    while (chosen.len() as u64) < target {
        diag.candidate_draws += 1;
        if diag.candidate_draws > draw_cap {
            return Err(Error::sampler(format!(
                "edge sampling stalled after {} candidate draws with {} of {target} edges placed",
                diag.candidate_draws,
                chosen.len()
            )));
        }
        let (v, w) = dist.sample_pair(rng)?;
        let b = bucket_of(attrs.cosine(v, w), params.theta_f.delta, buckets);
        let gamma = tables.gamma(p.of(v), p.of(w), b);
        if rng.gen::<f64>() >= gamma {
            continue;
        }
        diag.accepted_draws += 1;
        if !chosen.insert(norm(v, w)) {
            diag.duplicate_draws += 1;
        }
    }

    let g = AttributedGraph::new(n, k, chosen.into_iter().collect(), x)?;
    Ok((g, diag))
}

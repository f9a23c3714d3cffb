//! Attributed graphs, community partitions, and the structural census.
//!
//! Graphs are simple and undirected: vertices `0..n`, unordered edges with
//! no self-loops, and an `n x k` binary attribute matrix. A
//! [`CommunityPartition`] assigns every vertex to exactly one community;
//! index 0 is the discard community `C0`, which holds vertices no detected
//! community claimed and is treated like any other community when counting
//! edges and triangles.

use crate::{Error, Result};

/// Undirected simple graph with binary vertex attributes.
///
/// Construction normalizes and deduplicates edges, sorts adjacency lists,
/// and packs attribute rows into machine words so that cosine similarities
/// over vertex pairs stay cheap.
#[derive(Debug, Clone)]
pub struct AttributedGraph {
    n: usize,
    k: usize,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
    x: Vec<u8>,
    // attribute rows packed least-significant-bit first, `words` per row
    bits: Vec<u64>,
    words: usize,
    ones: Vec<u32>,
}

impl AttributedGraph {
    /// Builds a graph from `n`, an edge list, and a flat row-major `n x k`
    /// attribute matrix with entries in `{0, 1}`.
    ///
    /// Edges are stored as `(min, max)` pairs; duplicates collapse. Self
    /// loops, endpoints `>= n`, and non-binary attribute entries are
    /// rejected.
    pub fn new(n: usize, k: usize, edges: Vec<(u32, u32)>, x: Vec<u8>) -> Result<Self> {
        if x.len() != n * k {
            return Err(Error::invalid(format!(
                "attribute matrix has {} entries, expected {} ({} x {})",
                x.len(),
                n * k,
                n,
                k
            )));
        }
        if let Some(bad) = x.iter().find(|&&b| b > 1) {
            return Err(Error::invalid(format!(
                "non-binary attribute entry {bad}; entries must be 0 or 1"
            )));
        }

        let mut norm = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(Error::invalid(format!("self loop at vertex {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        norm.dedup();

        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &norm {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }

        let words = k.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        let mut ones = vec![0u32; n];
        for v in 0..n {
            for l in 0..k {
                if x[v * k + l] == 1 {
                    bits[v * words + l / 64] |= 1 << (l % 64);
                    ones[v] += 1;
                }
            }
        }

        Ok(AttributedGraph {
            n,
            k,
            edges: norm,
            adj,
            x,
            bits,
            words,
            ones,
        })
    }

    /// Convenience constructor for a graph without attributes (`k = 0`).
    pub fn from_edges(n: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        Self::new(n, 0, edges, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as normalized `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// Attribute row of `v` as `k` bytes in `{0, 1}`.
    pub fn attr_row(&self, v: u32) -> &[u8] {
        let v = v as usize;
        &self.x[v * self.k..(v + 1) * self.k]
    }

    /// Flat row-major copy of the attribute matrix.
    pub fn attr_matrix(&self) -> &[u8] {
        &self.x
    }

    /// Number of set attributes of `v`.
    pub fn attr_ones(&self, v: u32) -> u32 {
        self.ones[v as usize]
    }

    /// Cosine similarity of the attribute rows of `u` and `v`.
    ///
    /// Uses the packed rows; exact 0 for an all-zero row and exact 1 for
    /// identical non-zero rows.
    pub fn cosine(&self, u: u32, v: u32) -> f64 {
        let (cu, cv) = (self.ones[u as usize], self.ones[v as usize]);
        if cu == 0 || cv == 0 {
            return 0.0;
        }
        let (u, v) = (u as usize, v as usize);
        let mut dot = 0u32;
        for w in 0..self.words {
            dot += (self.bits[u * self.words + w] & self.bits[v * self.words + w]).count_ones();
        }
        // one square root of an integer product keeps identical rows at
        // exactly 1.0, which matters when similarities are bucketed
        let s = dot as f64 / ((cu as u64 * cv as u64) as f64).sqrt();
        s.clamp(0.0, 1.0)
    }
}

/// Cosine similarity of two binary vectors; 0 when either vector is all
/// zeros. The result always lands in `[0, 1]`.
pub fn cosine_similarity(x: &[u8], y: &[u8]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "cosine of vectors with different lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let mut dot = 0u64;
    let mut cx = 0u64;
    let mut cy = 0u64;
    for (&a, &b) in x.iter().zip(y) {
        if a > 1 || b > 1 {
            return Err(Error::invalid("non-binary attribute entry in cosine"));
        }
        dot += (a & b) as u64;
        cx += a as u64;
        cy += b as u64;
    }
    if cx == 0 || cy == 0 {
        return Ok(0.0);
    }
    Ok((dot as f64 / ((cx * cy) as f64).sqrt()).clamp(0.0, 1.0))
}

/// Number of similarity buckets for width `delta`: `floor(1/delta) + 1`.
pub fn bucket_count(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!(
            "bucket width {delta} outside (0, 1]"
        )));
    }
    Ok((1.0 / delta).floor() as usize + 1)
}

/// Aggregated edge feature: the cosine similarity of two attribute rows
/// discretized to bucket `floor(s / delta)`.
pub fn aggregate_feature(x: &[u8], y: &[u8], delta: f64) -> Result<usize> {
    let buckets = bucket_count(delta)?;
    let s = cosine_similarity(x, y)?;
    Ok(((s / delta).floor() as usize).min(buckets - 1))
}

pub(crate) fn bucket_of(s: f64, delta: f64, buckets: usize) -> usize {
    ((s / delta).floor() as usize).min(buckets - 1)
}

/// Partition of the vertex set into communities.
///
/// Community 0 is the discard community `C0`; real communities are indexed
/// from 1. Every vertex belongs to exactly one community. `C0` may be
/// empty, and frequently is when a partition comes from a detector that
/// assigns everything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityPartition {
    membership: Vec<u32>,
    communities: Vec<Vec<u32>>,
}

impl CommunityPartition {
    /// Builds a partition from a per-vertex membership vector. Community
    /// indices need not be contiguous; gaps become empty communities.
    pub fn from_membership(membership: Vec<u32>) -> Result<Self> {
        if membership.is_empty() {
            return Err(Error::invalid("empty partition"));
        }
        let count = *membership.iter().max().unwrap() as usize + 1;
        let mut communities = vec![Vec::new(); count.max(1)];
        for (v, &c) in membership.iter().enumerate() {
            communities[c as usize].push(v as u32);
        }
        Ok(CommunityPartition {
            membership,
            communities,
        })
    }

    /// Builds a partition from explicit communities over `n` vertices.
    /// `communities[0]` is `C0`. The lists must be disjoint and cover
    /// `0..n` exactly.
    pub fn from_communities(n: usize, communities: Vec<Vec<u32>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("empty partition"));
        }
        let mut membership = vec![u32::MAX; n];
        for (c, members) in communities.iter().enumerate() {
            for &v in members {
                if v as usize >= n {
                    return Err(Error::invalid(format!(
                        "vertex {v} out of range for {n} vertices"
                    )));
                }
                if membership[v as usize] != u32::MAX {
                    return Err(Error::invalid(format!(
                        "vertex {v} assigned to two communities"
                    )));
                }
                membership[v as usize] = c as u32;
            }
        }
        if let Some(v) = membership.iter().position(|&c| c == u32::MAX) {
            return Err(Error::invalid(format!("vertex {v} not covered")));
        }
        let mut communities = communities;
        if communities.is_empty() {
            communities.push(Vec::new());
        }
        Ok(CommunityPartition {
            membership,
            communities,
        })
    }

    /// One community (index 1) holding all `n` vertices, with an empty `C0`.
    pub fn single_community(n: usize) -> Result<Self> {
        Self::from_communities(n, vec![Vec::new(), (0..n as u32).collect()])
    }

    pub fn n(&self) -> usize {
        self.membership.len()
    }

    /// Total number of community slots, including `C0` and empty slots.
    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    /// Community index of vertex `v`.
    pub fn of(&self, v: u32) -> u32 {
        self.membership[v as usize]
    }

    /// Members of community `c` in increasing vertex order.
    pub fn community(&self, c: usize) -> &[u32] {
        &self.communities[c]
    }

    pub fn membership(&self) -> &[u32] {
        &self.membership
    }

    /// Indices of non-empty communities.
    pub fn non_empty(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.communities.len()).filter(|&c| !self.communities[c].is_empty())
    }
}

/// Structural counts of a graph under a partition: per-vertex intra/inter
/// degrees, per-community edge counts, triangle counts split by whether all
/// three vertices share a community, and the wedge count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralCensus {
    pub d_intra: Vec<u32>,
    pub d_inter: Vec<u32>,
    /// Intra-community edge count per community index (including `C0`).
    pub m_intra: Vec<u64>,
    pub m_inter: u64,
    pub tri_intra: u64,
    pub tri_inter: u64,
    pub tri_total: u64,
    /// Intra triangles per community index; sums to `tri_intra`.
    pub tri_intra_by_community: Vec<u64>,
    /// Paths of length two: `sum_v C(deg(v), 2)`.
    pub wedges: u64,
}

impl StructuralCensus {
    pub fn m_total(&self) -> u64 {
        self.m_intra.iter().sum::<u64>() + self.m_inter
    }

    /// Global clustering coefficient `3 * triangles / wedges`, or `None`
    /// when the graph has no wedges.
    pub fn global_clustering(&self) -> Option<f64> {
        if self.wedges == 0 {
            None
        } else {
            Some(3.0 * self.tri_total as f64 / self.wedges as f64)
        }
    }
}

/// Computes the [`StructuralCensus`] of `g` under `p`.
///
/// An edge is intra when both endpoints share a community (again, `C0`
/// included) and inter otherwise; a triangle is intra when all three
/// vertices share a community.
pub fn structural_census(g: &AttributedGraph, p: &CommunityPartition) -> Result<StructuralCensus> {
    if p.n() != g.n() {
        return Err(Error::invalid(format!(
            "partition covers {} vertices but graph has {}",
            p.n(),
            g.n()
        )));
    }
    let mut census = StructuralCensus {
        d_intra: vec![0; g.n()],
        d_inter: vec![0; g.n()],
        m_intra: vec![0; p.len()],
        m_inter: 0,
        tri_intra: 0,
        tri_inter: 0,
        tri_total: 0,
        tri_intra_by_community: vec![0; p.len()],
        wedges: 0,
    };

    for &(u, v) in g.edges() {
        if p.of(u) == p.of(v) {
            census.d_intra[u as usize] += 1;
            census.d_intra[v as usize] += 1;
            census.m_intra[p.of(u) as usize] += 1;
        } else {
            census.d_inter[u as usize] += 1;
            census.d_inter[v as usize] += 1;
            census.m_inter += 1;
        }
    }

    for v in 0..g.n() as u32 {
        let d = g.degree(v) as u64;
        census.wedges += d * (d.saturating_sub(1)) / 2;
    }

    // each triangle u < v < w is visited once via the edge (u, v)
    for &(u, v) in g.edges() {
        for w in common_neighbors_above(g, u, v, v) {
            census.tri_total += 1;
            let (cu, cv, cw) = (p.of(u), p.of(v), p.of(w));
            if cu == cv && cv == cw {
                census.tri_intra += 1;
                census.tri_intra_by_community[cu as usize] += 1;
            } else {
                census.tri_inter += 1;
            }
        }
    }

    Ok(census)
}

/// Total triangle count of `g`, independent of any partition.
pub fn triangle_count(g: &AttributedGraph) -> u64 {
    let mut total = 0u64;
    for &(u, v) in g.edges() {
        total += common_neighbors_above(g, u, v, v).count() as u64;
    }
    total
}

/// Number of wedges (paths of length two) in `g`.
pub fn wedge_count(g: &AttributedGraph) -> u64 {
    (0..g.n() as u32)
        .map(|v| {
            let d = g.degree(v) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum()
}

fn common_neighbors_above<'a>(
    g: &'a AttributedGraph,
    u: u32,
    v: u32,
    floor: u32,
) -> impl Iterator<Item = u32> + 'a {
    let mut a = g.neighbors(u).iter().peekable();
    let mut b = g.neighbors(v).iter().peekable();
    std::iter::from_fn(move || loop {
        let (&&x, &&y) = (a.peek()?, b.peek()?);
        match x.cmp(&y) {
            std::cmp::Ordering::Less => {
                a.next();
            }
            std::cmp::Ordering::Greater => {
                b.next();
            }
            std::cmp::Ordering::Equal => {
                a.next();
                b.next();
                if x > floor {
                    return Some(x);
                }
            }
        }
    })
}

//! Plain-text file formats for graphs and partitions.
//!
//! * Edge list: one `u v` pair per line, whitespace- or comma-separated,
//!   `#` starts a comment. Duplicate edges collapse; self loops are
//!   rejected.
//! * Attribute matrix: one row per vertex, `k` entries in `{0, 1}` per row.
//!   The row count fixes the vertex count.
//! * Partition: one `v community` pair per line; vertices that never appear
//!   fall into the discard community 0.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::graph::{AttributedGraph, CommunityPartition};
use crate::{Error, Result};

/// A graph loaded from disk, together with the original vertex ids.
///
/// Vertex ids are remapped to a dense `0..n` range. When every id in the
/// edge file is already below the attribute-row count the mapping is the
/// identity; otherwise ids are assigned densely in increasing order and
/// `original_ids[v]` records the id the edge file used for dense vertex
/// `v`. Attribute row `v` always describes dense vertex `v`.
#[derive(Debug)]
pub struct LoadedGraph {
    pub graph: AttributedGraph,
    pub original_ids: Vec<u64>,
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let body = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            };
            (i + 1, body.trim().to_string())
        })
        .filter(|(_, body)| !body.is_empty())
        .collect())
}

fn split_tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
}

/// Loads an attributed graph from an edge-list file and an attribute-matrix
/// file. The attribute file determines the vertex count.
pub fn load_attributed_graph(
    edge_path: impl AsRef<Path>,
    attr_path: impl AsRef<Path>,
) -> Result<LoadedGraph> {
    let edge_path = edge_path.as_ref();
    let attr_path = attr_path.as_ref();

    let (n, k, x) = read_attribute_matrix(attr_path)?;

    let mut raw_edges: Vec<(u64, u64)> = Vec::new();
    for (lineno, line) in read_lines(edge_path)? {
        let mut toks = split_tokens(&line);
        let parse = |tok: Option<&str>| -> Result<u64> {
            tok.and_then(|t| t.parse().ok()).ok_or_else(|| {
                Error::parse(edge_path, lineno, format!("expected `u v`, got `{line}`"))
            })
        };
        let u = parse(toks.next())?;
        let v = parse(toks.next())?;
        if toks.next().is_some() {
            return Err(Error::parse(
                edge_path,
                lineno,
                format!("expected `u v`, got `{line}`"),
            ));
        }
        if u == v {
            return Err(Error::parse(edge_path, lineno, format!("self loop at {u}")));
        }
        raw_edges.push((u, v));
    }

    let dense_already = raw_edges
        .iter()
        .all(|&(u, v)| (u as usize) < n && (v as usize) < n);

    let (edges, original_ids) = if dense_already {
        (
            raw_edges
                .iter()
                .map(|&(u, v)| (u as u32, v as u32))
                .collect::<Vec<_>>(),
            (0..n as u64).collect(),
        )
    } else {
        let mut ids: Vec<u64> = raw_edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() > n {
            return Err(Error::invalid(format!(
                "edge file {} names {} distinct vertices but the attribute \
                 matrix {} has only {} rows",
                edge_path.display(),
                ids.len(),
                attr_path.display(),
                n
            )));
        }
        let dense = |id: u64| ids.binary_search(&id).unwrap() as u32;
        (
            raw_edges
                .iter()
                .map(|&(u, v)| (dense(u), dense(v)))
                .collect(),
            ids,
        )
    };

    Ok(LoadedGraph {
        graph: AttributedGraph::new(n, k, edges, x)?,
        original_ids,
    })
}

fn read_attribute_matrix(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (lineno, line) in read_lines(path)? {
        let mut row = Vec::new();
        for tok in split_tokens(&line) {
            match tok {
                "0" => row.push(0),
                "1" => row.push(1),
                other => {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("attribute entries must be 0 or 1, got `{other}`"),
                    ))
                }
            }
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!(
                        "ragged attribute matrix: row has {} entries, expected {}",
                        row.len(),
                        first.len()
                    ),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::invalid(format!(
            "attribute matrix {} is empty",
            path.display()
        )));
    }
    let n = rows.len();
    let k = rows[0].len();
    Ok((n, k, rows.concat()))
}

/// Loads a partition file over `n` vertices. Unlisted vertices land in the
/// discard community 0.
pub fn load_partition(path: impl AsRef<Path>, n: usize) -> Result<CommunityPartition> {
    let path = path.as_ref();
    let mut membership = vec![0u32; n];
    let mut seen = vec![false; n];
    for (lineno, line) in read_lines(path)? {
        let mut toks = split_tokens(&line);
        let (v, c) = match (
            toks.next().and_then(|t| t.parse::<usize>().ok()),
            toks.next().and_then(|t| t.parse::<u32>().ok()),
            toks.next(),
        ) {
            (Some(v), Some(c), None) => (v, c),
            _ => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected `vertex community`, got `{line}`"),
                ))
            }
        };
        if v >= n {
            return Err(Error::parse(
                path,
                lineno,
                format!("vertex {v} out of range for {n} vertices"),
            ));
        }
        if seen[v] {
            return Err(Error::parse(path, lineno, format!("vertex {v} listed twice")));
        }
        seen[v] = true;
        membership[v] = c;
    }
    CommunityPartition::from_membership(membership)
}

/// Writes the edge list of `g` in the format accepted by
/// [`load_attributed_graph`].
pub fn write_edge_list(path: impl AsRef<Path>, g: &AttributedGraph) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("# {} vertices, {} edges\n", g.n(), g.edge_count());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    write_file(path, &out)
}

/// Writes the attribute matrix of `g`, one row per vertex.
pub fn write_attribute_matrix(path: impl AsRef<Path>, g: &AttributedGraph) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for v in 0..g.n() as u32 {
        let row: Vec<String> = g.attr_row(v).iter().map(|b| b.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    write_file(path, &out)
}

/// Writes `p` in the format accepted by [`load_partition`].
pub fn write_partition(path: impl AsRef<Path>, p: &CommunityPartition) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for (v, &c) in p.membership().iter().enumerate() {
        let _ = writeln!(out, "{v} {c}");
    }
    write_file(path, &out)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(PathBuf::from(parent), e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

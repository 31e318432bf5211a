//! Undirected simple graphs built from molecular structures or edge lists.

mod elements;
mod pdb;
mod stats;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub use elements::{covalent_radius, normalize_element};
pub use pdb::{load_structure, parse_structure, BondMode, StructureOptions, DEFAULT_BOND_TOLERANCE};
pub use stats::{compute_stats, longest_path, GraphStats};

/// Per-atom annotation carried by graphs built from structure files.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomRecord {
    /// Dense node index.
    pub id: usize,
    /// Serial number from the structure file.
    pub serial: i64,
    /// Element symbol, or `"X"` when unknown.
    pub element: String,
    pub atom_name: String,
    pub residue_name: String,
    pub residue_seq: i32,
    pub chain: char,
    /// Cartesian position in Ångström.
    pub position: [f64; 3],
}

/// Immutable undirected simple graph in compressed sparse row form.
///
/// Neighbour lists are sorted, symmetric and free of self-loops and
/// duplicates. Structure-derived graphs also carry one [`AtomRecord`] per
/// node; edge-list graphs carry none.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularGraph {
    atoms: Vec<AtomRecord>,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
}

impl MolecularGraph {
    /// Builds a graph on `node_count` nodes. Self-loops and repeated
    /// edges are dropped.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); node_count];
        for (u, v) in edges {
            for x in [u, v] {
                if x >= node_count {
                    return Err(Error::NodeOutOfRange { node: x, nodes: node_count });
                }
            }
            if u == v {
                log::warn!("dropping self-loop on node {u}");
                continue;
            }
            lists[u].push(v as u32);
            lists[v].push(u as u32);
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        let mut neighbors = Vec::new();
        offsets.push(0u32);
        for mut list in lists {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len() as u32);
        }
        Ok(Self { atoms: Vec::new(), offsets, neighbors })
    }

    /// Attaches atom annotations. `atoms[i].id` must equal `i`.
    pub fn with_atoms(mut self, atoms: Vec<AtomRecord>) -> Result<Self> {
        if atoms.len() != self.node_count() {
            return Err(Error::LengthMismatch { expected: self.node_count(), actual: atoms.len() });
        }
        if let Some((i, a)) = atoms.iter().enumerate().find(|(i, a)| a.id != *i) {
            return Err(Error::Invalid(format!("atom at position {i} has id {}", a.id)));
        }
        self.atoms = atoms;
        Ok(self)
    }

    /// Path graph on `n` nodes.
    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("valid path")
    }

    /// Cycle graph on `n >= 3` nodes.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 nodes");
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.node_count() == 0
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[u32] {
        let lo = self.offsets[u] as usize;
        let hi = self.offsets[u + 1] as usize;
        &self.neighbors[lo..hi]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        (self.offsets[u + 1] - self.offsets[u]) as usize
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count()).map(|u| self.degree(u)).max().unwrap_or(0)
    }

    /// Atom annotations; empty for edge-list graphs.
    pub fn atoms(&self) -> &[AtomRecord] {
        &self.atoms
    }

    pub fn has_annotations(&self) -> bool {
        !self.atoms.is_empty()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            stack.push(s);
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &v in self.neighbors(u) {
                    let v = v as usize;
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Canonical text form: `nodes N edges M` followed by sorted `u v` lines.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::with_capacity(16 + self.edge_count() * 10);
        writeln!(s, "nodes {} edges {}", self.node_count(), self.edge_count()).unwrap();
        for (u, v) in self.edges() {
            writeln!(s, "{u} {v}").unwrap();
        }
        s
    }

    /// Parses either the canonical form or a plain edge list.
    pub fn parse_graph_text(text: &str) -> Result<Self> {
        let mut declared: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        let mut max_id: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with("nodes") {
                if declared.is_some() || !edges.is_empty() {
                    return Err(parse_err(line_no, "header must come first"));
                }
                declared = Some(parse_header(line).ok_or_else(|| parse_err(line_no, "bad header"))?);
                continue;
            }
            let mut it = line.split_whitespace();
            let (a, b) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => return Err(parse_err(line_no, "expected two node ids")),
            };
            let u = parse_id(a, line_no)?;
            let v = parse_id(b, line_no)?;
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push((u, v));
        }
        let node_count = match declared {
            Some((n, _)) => n,
            None => max_id.map_or(0, |m| m + 1),
        };
        let g = Self::from_edges(node_count, edges)?;
        if let Some((_, m)) = declared {
            if m != g.edge_count() {
                return Err(Error::Invalid(format!(
                    "header declares {m} edges, found {}",
                    g.edge_count()
                )));
            }
        }
        Ok(g)
    }

    /// Writes the canonical form to `path`.
    pub fn write_canonical(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_canonical_string())
            .map_err(|source| Error::Io { path: path.to_owned(), source })
    }
}

/// Loads a whitespace-separated `u v` edge list (`#` starts a comment).
pub fn load_edge_list(path: &Path) -> Result<MolecularGraph> {
    let text = read_text(path)?;
    MolecularGraph::parse_graph_text(&text)
}

/// Loads a graph from a structure file, a canonical graph file or an
/// edge list, picking the reader from the file contents.
pub fn load_any(path: &Path, opts: &StructureOptions) -> Result<MolecularGraph> {
    let text = read_text(path)?;
    if looks_like_structure(&text) {
        parse_structure(&text, opts).map_err(|e| match e {
            Error::NoAtoms(_) => Error::NoAtoms(path.to_owned()),
            Error::NoConnectivity(_) => Error::NoConnectivity(path.to_owned()),
            other => other,
        })
    } else {
        MolecularGraph::parse_graph_text(&text)
    }
}

fn looks_like_structure(text: &str) -> bool {
    text.lines().any(|l| l.starts_with("ATOM  ") || l.starts_with("HETATM"))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse { line, msg: msg.to_owned() }
}

fn parse_id(tok: &str, line: usize) -> Result<usize> {
    let v: i64 = tok.parse().map_err(|_| parse_err(line, &format!("not an integer: {tok:?}")))?;
    if v < 0 {
        return Err(parse_err(line, &format!("negative node id {v}")));
    }
    Ok(v as usize)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let t: Vec<&str> = line.split_whitespace().collect();
    match t.as_slice() {
        ["nodes", n, "edges", m] => Some((n.parse().ok()?, m.parse().ok()?)),
        _ => None,
    }
}

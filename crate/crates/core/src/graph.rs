//! Target graphs for graph-state synthesis: construction, lattice
//! generators, edge-list parsing and DOT export.
//!
//! Vertices are opaque strings so hand-written graphs and generated
//! lattices share one code path. Vertex order is insertion order and
//! every algorithm downstream iterates in that order, which keeps the
//! whole pipeline reproducible.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("self-loop on vertex '{0}'")]
    SelfLoop(String),
    #[error("duplicate edge between '{0}' and '{1}'")]
    DuplicateEdge(String, String),
    #[error("edge endpoint '{0}' is not a declared vertex")]
    UnknownVertex(String),
    #[error("lattice dimensions must be at least 1")]
    InvalidDimension,
}

/// An undirected simple graph: the target of a weaving schedule.
///
/// No self-loops and no duplicate edges. Edges are stored normalized so
/// that the endpoint declared first comes first.
#[derive(Debug, Clone, Default)]
pub struct GraphSpec {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    edge_set: HashSet<(usize, usize)>,
}

impl GraphSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a vertex (idempotent) and returns its canonical index.
    pub fn add_vertex(&mut self, id: impl Into<String>) -> usize {
        let id = id.into();
        if let Some(&i) = self.index.get(&id) {
            return i;
        }
        let i = self.vertices.len();
        self.index.insert(id.clone(), i);
        self.vertices.push(id);
        i
    }

    /// Adds an undirected edge, declaring endpoints in first-appearance
    /// order if needed.
    pub fn add_edge(&mut self, u: &str, v: &str) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u.to_string()));
        }
        let ui = self.add_vertex(u);
        let vi = self.add_vertex(v);
        let key = (ui.min(vi), ui.max(vi));
        if !self.edge_set.insert(key) {
            return Err(GraphError::DuplicateEdge(u.to_string(), v.to_string()));
        }
        self.edges.push(key);
        Ok(())
    }

    pub fn from_edge_pairs<'a, I>(pairs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut g = Self::new();
        for (u, v) in pairs {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Parses the plain edge-list format: one "u v" pair per line,
    /// `#` starts a comment, blank lines are skipped. Vertices are
    /// declared in first-appearance order.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut g = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens.as_slice() {
                [] => continue,
                [u, v] => g.add_edge(u, v).map_err(|e| GraphError::Parse {
                    line,
                    msg: e.to_string(),
                })?,
                other => {
                    return Err(GraphError::Parse {
                        line,
                        msg: format!("expected 'u v', found {} token(s)", other.len()),
                    })
                }
            }
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertex ids in canonical (insertion) order.
    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn vertex_name(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    /// Edges as index pairs (lower index first), insertion order.
    pub fn edge_indices(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges as name pairs, insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges
            .iter()
            .map(|&(u, v)| (self.vertices[u].as_str(), self.vertices[v].as_str()))
    }

    pub fn contains_edge(&self, u: &str, v: &str) -> bool {
        match (self.vertex_index(u), self.vertex_index(v)) {
            (Some(ui), Some(vi)) => self.edge_set.contains(&(ui.min(vi), ui.max(vi))),
            _ => false,
        }
    }

    /// Edge set with endpoints ordered lexically, for comparisons that
    /// should not depend on insertion order.
    pub fn edge_name_set(&self) -> BTreeSet<(String, String)> {
        self.edges()
            .map(|(u, v)| {
                if u <= v {
                    (u.to_string(), v.to_string())
                } else {
                    (v.to_string(), u.to_string())
                }
            })
            .collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertices.len()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Vertices of odd degree, in canonical order. Within each connected
    /// component the count is even (handshake lemma).
    pub fn odd_degree_vertices(&self) -> Vec<&str> {
        self.degrees()
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d % 2 == 1)
            .map(|(i, _)| self.vertices[i].as_str())
            .collect()
    }

    /// Connected components as canonical-order vertex index lists,
    /// ordered by their smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut queue = vec![start];
            while let Some(v) = queue.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// DOT-format rendering (undirected), deterministic order. Ids are
    /// quoted unless they are safe bare DOT identifiers.
    pub fn to_dot(&self) -> String {
        fn fmt_id(id: &str) -> String {
            let bare = !id.is_empty()
                && id
                    .chars()
                    .next()
                    .map(|c| c.is_ascii_alphabetic() || c == '_')
                    .unwrap_or(false)
                && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if bare {
                id.to_string()
            } else {
                format!("\"{}\"", id.replace('\\', "\\\\").replace('"', "\\\""))
            }
        }
        let mut out = String::from("graph {\n");
        for v in &self.vertices {
            let _ = writeln!(out, "  {};", fmt_id(v));
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {} -- {};", fmt_id(u), fmt_id(v));
        }
        out.push_str("}\n");
        out
    }

    /// SHA-256 over a canonical text form of the (vertex, edge) sets.
    /// Invariant under insertion order, so it identifies the logical
    /// graph a schedule was planned for.
    pub fn canonical_hash(&self) -> String {
        let mut verts: Vec<&str> = self.vertices.iter().map(|s| s.as_str()).collect();
        verts.sort_unstable();
        let mut edges: Vec<(String, String)> = self.edge_name_set().into_iter().collect();
        edges.sort();
        let mut hasher = Sha256::new();
        hasher.update(b"gw-graph-v1\n");
        for v in verts {
            hasher.update(b"v ");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        for (u, v) in edges {
            hasher.update(b"e ");
            hasher.update(u.as_bytes());
            hasher.update(b" ");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{:02x}", b);
        }
        hex
    }
}

/// Lattice families used as synthesis targets.
///
/// Vertex id conventions:
/// * `Square(rows, cols)` — ids `"r.c"`, `0 <= r < rows`, `0 <= c < cols`;
///   edges between horizontal and vertical grid neighbours.
/// * `Honeycomb(rows, cols)` — brick-wall embedding on the same `"r.c"`
///   grid: every horizontal edge `(r.c, r.c+1)` is present, and the
///   vertical edge `(r.c, r+1.c)` is present iff `r + c` is even. Interior
///   vertices then have degree 3, which is the honeycomb coordination.
/// * `Cubic(n)` — ids `"x.y.z"` with each coordinate in `0..n`; edges
///   between axis-aligned neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    Square { rows: usize, cols: usize },
    Honeycomb { rows: usize, cols: usize },
    Cubic { n: usize },
}

impl LatticeKind {
    /// Closed-form edge count for the generated lattice.
    pub fn expected_edge_count(&self) -> usize {
        match *self {
            LatticeKind::Square { rows, cols } => rows * (cols - 1) + cols * (rows - 1),
            LatticeKind::Honeycomb { rows, cols } => {
                let horizontal = rows * (cols - 1);
                let vertical: usize = (0..rows.saturating_sub(1))
                    .map(|r| (0..cols).filter(|c| (r + c) % 2 == 0).count())
                    .sum();
                horizontal + vertical
            }
            LatticeKind::Cubic { n } => 3 * n * n * (n - 1),
        }
    }

    /// Builds the lattice graph with canonical vertex ids.
    pub fn build(&self) -> Result<GraphSpec, GraphError> {
        let mut g = GraphSpec::new();
        match *self {
            LatticeKind::Square { rows, cols } => {
                if rows == 0 || cols == 0 {
                    return Err(GraphError::InvalidDimension);
                }
                for r in 0..rows {
                    for c in 0..cols {
                        g.add_vertex(format!("{}.{}", r, c));
                    }
                }
                for r in 0..rows {
                    for c in 0..cols {
                        if c + 1 < cols {
                            g.add_edge(&format!("{}.{}", r, c), &format!("{}.{}", r, c + 1))?;
                        }
                        if r + 1 < rows {
                            g.add_edge(&format!("{}.{}", r, c), &format!("{}.{}", r + 1, c))?;
                        }
                    }
                }
            }
            LatticeKind::Honeycomb { rows, cols } => {
                if rows == 0 || cols == 0 {
                    return Err(GraphError::InvalidDimension);
                }
                for r in 0..rows {
                    for c in 0..cols {
                        g.add_vertex(format!("{}.{}", r, c));
                    }
                }
                for r in 0..rows {
                    for c in 0..cols {
                        if c + 1 < cols {
                            g.add_edge(&format!("{}.{}", r, c), &format!("{}.{}", r, c + 1))?;
                        }
                        if r + 1 < rows && (r + c) % 2 == 0 {
                            g.add_edge(&format!("{}.{}", r, c), &format!("{}.{}", r + 1, c))?;
                        }
                    }
                }
            }
            LatticeKind::Cubic { n } => {
                if n == 0 {
                    return Err(GraphError::InvalidDimension);
                }
                for x in 0..n {
                    for y in 0..n {
                        for z in 0..n {
                            g.add_vertex(format!("{}.{}.{}", x, y, z));
                        }
                    }
                }
                for x in 0..n {
                    for y in 0..n {
                        for z in 0..n {
                            let here = format!("{}.{}.{}", x, y, z);
                            if x + 1 < n {
                                g.add_edge(&here, &format!("{}.{}.{}", x + 1, y, z))?;
                            }
                            if y + 1 < n {
                                g.add_edge(&here, &format!("{}.{}.{}", x, y + 1, z))?;
                            }
                            if z + 1 < n {
                                g.add_edge(&here, &format!("{}.{}.{}", x, y, z + 1))?;
                            }
                        }
                    }
                }
            }
        }
        debug_assert_eq!(g.edge_count(), self.expected_edge_count());
        Ok(g)
    }
}

impl FromStr for LatticeKind {
    type Err = GraphError;

    /// Parses the CLI shorthand: `square:RxC`, `honeycomb:RxC`, `cubic:N`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::Parse {
            line: 1,
            msg: format!(
                "invalid lattice spec '{}': expected square:RxC, honeycomb:RxC or cubic:N",
                s
            ),
        };
        let (kind, dims) = s.split_once(':').ok_or_else(bad)?;
        let parse_dim = |t: &str| t.parse::<usize>().ok().filter(|&d| d >= 1);
        match kind {
            "square" | "honeycomb" => {
                let (r, c) = dims.split_once('x').ok_or_else(bad)?;
                let rows = parse_dim(r).ok_or_else(bad)?;
                let cols = parse_dim(c).ok_or_else(bad)?;
                Ok(if kind == "square" {
                    LatticeKind::Square { rows, cols }
                } else {
                    LatticeKind::Honeycomb { rows, cols }
                })
            }
            "cubic" => {
                let n = parse_dim(dims).ok_or_else(bad)?;
                Ok(LatticeKind::Cubic { n })
            }
            _ => Err(bad()),
        }
    }
}

/// Convenience wrapper matching the lattice generator entry point.
pub fn make_lattice(kind: LatticeKind) -> Result<GraphSpec, GraphError> {
    kind.build()
}

//! Trail decomposition and schedule planning.
//!
//! A spider photon weaves entanglement links along a trail: a walk that
//! may revisit vertices but never retraces an edge (retracing would undo
//! the bond). Covering a graph with the fewest such trails is the classic
//! Euler-trail question: a connected graph with `2k > 0` odd-degree
//! vertices needs exactly `k` open trails, and one closed trail suffices
//! when every degree is even.
//!
//! The planner pairs odd-degree vertices with virtual edges, builds an
//! Eulerian circuit with Hierholzer's algorithm, and splits the circuit at
//! the virtual edges. All tie-breaking (start vertex, odd pairing,
//! neighbor iteration) follows canonical vertex order, so plans are
//! reproducible.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GraphSpec;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("block must list at least two vertices")]
    BlockTooShort,
    #[error("block vertex '{0}' is not in the target graph")]
    UnknownBlockVertex(String),
    #[error("block edge ({0}, {1}) is not in the target graph")]
    BlockEdgeNotInGraph(String, String),
    #[error("blocks overlap on edge ({0}, {1})")]
    OverlappingBlocks(String, String),
    #[error("cubic counting formulas need n >= 2, got {0}")]
    DimensionTooSmall(u64),
}

/// A walk that never repeats an edge; vertices may repeat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trail {
    vertices: Vec<String>,
}

impl Trail {
    /// Panics if the walk is shorter than one edge or repeats an edge.
    pub fn new(vertices: Vec<String>) -> Self {
        assert!(vertices.len() >= 2, "a trail spans at least one edge");
        let mut seen = std::collections::HashSet::new();
        for w in vertices.windows(2) {
            let key = if w[0] <= w[1] { (&w[0], &w[1]) } else { (&w[1], &w[0]) };
            assert!(seen.insert((key.0.clone(), key.1.clone())), "trail retraces an edge");
        }
        Self { vertices }
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.vertices
            .windows(2)
            .map(|w| (w[0].as_str(), w[1].as_str()))
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }
}

/// One executable step of a weave schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    /// Entangle a fresh spider photon to vertex `p`.
    Attach { p: String },
    /// Weave the link `(p, r)`; the spider correlation moves from `p` to `r`.
    Link { p: String, r: String },
    /// Measure the spider out; `r` is the vertex it was last bound to.
    Detach { r: String },
    /// A pre-linked chain consumed as a ready-made building block.
    PrepareBlock { edges: Vec<(String, String)> },
}

/// Planner options; currently the pre-linked building-block chains.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerOptions {
    /// Chains of vertices whose consecutive edges are prepared as blocks
    /// rather than woven by the spider.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<Vec<String>>,
}

impl PlannerOptions {
    pub fn is_default(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// An ordered, executable realization of a target graph.
///
/// Serialized form (schema v1, field order fixed):
/// `{"v": 1, "graph_hash": "...", "steps": [{"op": "attach", "p": ...}, ...]}`
/// with planner options appended only when they differ from the default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeaveSchedule {
    pub v: u32,
    pub graph_hash: String,
    pub steps: Vec<Step>,
    #[serde(default, skip_serializing_if = "PlannerOptions::is_default")]
    pub options: PlannerOptions,
}

impl WeaveSchedule {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        use serde::de::Error as _;
        let s: WeaveSchedule = serde_json::from_str(text)?;
        if s.v != 1 {
            return Err(serde_json::Error::custom(format!(
                "unsupported schedule schema version {}",
                s.v
            )));
        }
        Ok(s)
    }
}

/// Entangler-operation counts for one target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub cascade_ops: u64,
    pub box_ops: u64,
    pub direct_ops: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule_ops: Option<u64>,
}

/// A broken schedule invariant. Violations are data, not failures: the
/// validator reports all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// An edge is woven or prepared more than once.
    RetracedEdge(String, String),
    /// A scheduled edge is not part of the target graph.
    UnknownEdge(String, String),
    /// A target edge is never scheduled.
    UncoveredEdge(String, String),
    /// A scheduled vertex is not declared in the target graph.
    UnknownVertex { step: usize, id: String },
    /// A link or block edge joins a vertex to itself.
    SelfLink { step: usize, id: String },
    /// Link whose `p` is not the current spider anchor.
    AnchorDiscontinuity { step: usize, expected: Option<String>, found: String },
    /// Attach while a spider is already attached.
    AttachWhileAttached { step: usize },
    /// Detach with no spider attached.
    DetachWithoutAttach { step: usize },
    /// Detach naming a vertex other than the current anchor.
    DetachMismatch { step: usize, expected: String, found: String },
    /// The schedule ends with the spider still attached.
    UnclosedAttach { step: usize },
    /// The schedule was planned for a different graph.
    HashMismatch { expected: String, found: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::RetracedEdge(u, v) => write!(f, "retraced edge ({}, {})", u, v),
            Violation::UnknownEdge(u, v) => write!(f, "edge ({}, {}) is not in the target", u, v),
            Violation::UncoveredEdge(u, v) => write!(f, "target edge ({}, {}) is never covered", u, v),
            Violation::UnknownVertex { step, id } => {
                write!(f, "step {}: unknown vertex '{}'", step, id)
            }
            Violation::SelfLink { step, id } => write!(f, "step {}: self-link on '{}'", step, id),
            Violation::AnchorDiscontinuity { step, expected, found } => match expected {
                Some(e) => write!(f, "step {}: link from '{}' but anchor is '{}'", step, found, e),
                None => write!(f, "step {}: link from '{}' with no spider attached", step, found),
            },
            Violation::AttachWhileAttached { step } => {
                write!(f, "step {}: attach while a spider is already attached", step)
            }
            Violation::DetachWithoutAttach { step } => {
                write!(f, "step {}: detach with no spider attached", step)
            }
            Violation::DetachMismatch { step, expected, found } => {
                write!(f, "step {}: detach at '{}' but anchor is '{}'", step, found, expected)
            }
            Violation::UnclosedAttach { step } => {
                write!(f, "step {}: attach is never closed by a detach", step)
            }
            Violation::HashMismatch { expected, found } => {
                write!(f, "graph hash mismatch: schedule {}, target {}", found, expected)
            }
        }
    }
}

/// Minimum number of edge-disjoint trails covering the graph: per
/// connected component with edges, `max(1, odd_vertices / 2)`.
pub fn min_trail_count(g: &GraphSpec) -> usize {
    let deg = g.degrees();
    g.connected_components()
        .iter()
        .map(|comp| {
            let has_edges = comp.iter().any(|&v| deg[v] > 0);
            if !has_edges {
                return 0;
            }
            let odd = comp.iter().filter(|&&v| deg[v] % 2 == 1).count();
            (odd / 2).max(1)
        })
        .sum()
}

/// Multigraph adjacency used by the circuit construction: real edges
/// first (insertion order), then virtual pairing edges.
struct TrailBuilder {
    adj: Vec<Vec<(usize, usize)>>,
    virtual_from: usize,
    edge_total: usize,
}

impl TrailBuilder {
    fn new(g: &GraphSpec, comp: &[usize], virtual_pairs: &[(usize, usize)]) -> Self {
        let n = g.vertex_count();
        let mut adj = vec![Vec::new(); n];
        let in_comp = {
            let mut f = vec![false; n];
            for &v in comp {
                f[v] = true;
            }
            f
        };
        let mut eid = 0usize;
        for &(u, v) in g.edge_indices() {
            if in_comp[u] {
                adj[u].push((v, eid));
                adj[v].push((u, eid));
                eid += 1;
            }
        }
        let virtual_from = eid;
        for &(u, v) in virtual_pairs {
            adj[u].push((v, eid));
            adj[v].push((u, eid));
            eid += 1;
        }
        Self { adj, virtual_from, edge_total: eid }
    }

    /// Hierholzer's circuit construction from `start`; every edge of the
    /// component is used exactly once. Returns the vertex sequence and
    /// the edge ids between consecutive vertices.
    fn eulerian_circuit(&self, start: usize) -> (Vec<usize>, Vec<usize>) {
        let mut used = vec![false; self.edge_total];
        let mut ptr = vec![0usize; self.adj.len()];
        let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
        let mut verts = Vec::new();
        let mut eids = Vec::new();
        while let Some(&(v, _)) = stack.last() {
            let lst = &self.adj[v];
            while ptr[v] < lst.len() && used[lst[ptr[v]].1] {
                ptr[v] += 1;
            }
            if ptr[v] == lst.len() {
                let (v, incoming) = stack.pop().expect("stack is non-empty");
                verts.push(v);
                if let Some(e) = incoming {
                    eids.push(e);
                }
            } else {
                let (nbr, eid) = lst[ptr[v]];
                used[eid] = true;
                stack.push((nbr, Some(eid)));
            }
        }
        verts.reverse();
        eids.reverse();
        (verts, eids)
    }
}

/// Decomposes the graph into edge-disjoint trails that jointly cover
/// every edge exactly once; the trail count equals `min_trail_count`.
pub fn decompose_trails(g: &GraphSpec) -> Vec<Trail> {
    let deg = g.degrees();
    let mut trails = Vec::new();
    for comp in g.connected_components() {
        if !comp.iter().any(|&v| deg[v] > 0) {
            continue;
        }
        let odd: Vec<usize> = comp.iter().copied().filter(|&v| deg[v] % 2 == 1).collect();
        let virtual_pairs: Vec<(usize, usize)> =
            odd.chunks(2).map(|pair| (pair[0], pair[1])).collect();
        let builder = TrailBuilder::new(g, &comp, &virtual_pairs);
        let start = if odd.is_empty() { comp[0] } else { odd[0] };
        let (verts, eids) = builder.eulerian_circuit(start);
        let m = eids.len();
        debug_assert_eq!(verts.len(), m + 1);

        let name = |i: usize| g.vertex_name(i).to_string();
        if virtual_pairs.is_empty() {
            trails.push(Trail::new(verts.iter().map(|&v| name(v)).collect()));
            continue;
        }
        // Rotate the closed circuit so it begins with a virtual edge, then
        // sweep: every virtual edge terminates one trail segment. Two
        // virtual edges are never adjacent (each odd vertex carries exactly
        // one), so segments are non-empty.
        let first_virtual = eids
            .iter()
            .position(|&e| e >= builder.virtual_from)
            .expect("odd pairing implies a virtual edge in the circuit");
        let rot_e = |i: usize| eids[(first_virtual + i) % m];
        let rot_v = |i: usize| verts[(first_virtual + i) % m];
        let mut current: Vec<String> = Vec::new();
        for i in 0..m {
            if rot_e(i) >= builder.virtual_from {
                if !current.is_empty() {
                    trails.push(Trail::new(current));
                    current = Vec::new();
                }
            } else {
                if current.is_empty() {
                    current.push(name(rot_v(i)));
                }
                current.push(name(rot_v(i + 1)));
            }
        }
        if !current.is_empty() {
            trails.push(Trail::new(current));
        }
    }
    trails
}

/// Plans an executable schedule: blocks first (when requested), then one
/// attach/link.../detach pass per trail of the remaining edges.
pub fn plan_schedule(g: &GraphSpec, opts: &PlannerOptions) -> Result<WeaveSchedule, PlanError> {
    let mut block_edges: HashMap<(usize, usize), ()> = HashMap::new();
    let mut steps = Vec::new();
    for chain in &opts.blocks {
        if chain.len() < 2 {
            return Err(PlanError::BlockTooShort);
        }
        let mut edges = Vec::new();
        for w in chain.windows(2) {
            let (u, v) = (w[0].as_str(), w[1].as_str());
            let ui = g
                .vertex_index(u)
                .ok_or_else(|| PlanError::UnknownBlockVertex(u.to_string()))?;
            let vi = g
                .vertex_index(v)
                .ok_or_else(|| PlanError::UnknownBlockVertex(v.to_string()))?;
            if !g.contains_edge(u, v) {
                return Err(PlanError::BlockEdgeNotInGraph(u.to_string(), v.to_string()));
            }
            let key = (ui.min(vi), ui.max(vi));
            if block_edges.insert(key, ()).is_some() {
                return Err(PlanError::OverlappingBlocks(u.to_string(), v.to_string()));
            }
            edges.push((u.to_string(), v.to_string()));
        }
        steps.push(Step::PrepareBlock { edges });
    }

    // Remaining graph: same vertices, edges not consumed by blocks.
    let mut remaining = GraphSpec::new();
    for v in g.vertices() {
        remaining.add_vertex(v.clone());
    }
    for &(u, v) in g.edge_indices() {
        if !block_edges.contains_key(&(u, v)) {
            remaining
                .add_edge(g.vertex_name(u), g.vertex_name(v))
                .expect("edges of a valid graph re-insert cleanly");
        }
    }

    for trail in decompose_trails(&remaining) {
        let verts = trail.vertices();
        steps.push(Step::Attach { p: verts[0].clone() });
        for w in verts.windows(2) {
            steps.push(Step::Link { p: w[0].clone(), r: w[1].clone() });
        }
        steps.push(Step::Detach { r: verts[verts.len() - 1].clone() });
    }

    Ok(WeaveSchedule {
        v: 1,
        graph_hash: g.canonical_hash(),
        steps,
        options: opts.clone(),
    })
}

/// Checks every schedule invariant against the target graph and reports
/// all violations (empty result = valid). The graph-hash check is
/// skipped when the schedule carries an empty hash, so hand-written
/// schedules need not compute one.
pub fn validate_schedule(s: &WeaveSchedule, g: &GraphSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if !s.graph_hash.is_empty() {
        let expected = g.canonical_hash();
        if s.graph_hash != expected {
            out.push(Violation::HashMismatch { expected, found: s.graph_hash.clone() });
        }
    }

    let mut anchor: Option<String> = None;
    let mut attach_step: usize = 0;
    let mut coverage: HashMap<(String, String), usize> = HashMap::new();
    let known = |out: &mut Vec<Violation>, step: usize, id: &str| -> bool {
        if g.vertex_index(id).is_none() {
            out.push(Violation::UnknownVertex { step, id: id.to_string() });
            false
        } else {
            true
        }
    };
    let norm = |u: &str, v: &str| {
        if u <= v {
            (u.to_string(), v.to_string())
        } else {
            (v.to_string(), u.to_string())
        }
    };

    for (i, step) in s.steps.iter().enumerate() {
        match step {
            Step::Attach { p } => {
                known(&mut out, i, p);
                if anchor.is_some() {
                    out.push(Violation::AttachWhileAttached { step: i });
                }
                anchor = Some(p.clone());
                attach_step = i;
            }
            Step::Link { p, r } => {
                known(&mut out, i, p);
                known(&mut out, i, r);
                if p == r {
                    out.push(Violation::SelfLink { step: i, id: p.clone() });
                } else {
                    *coverage.entry(norm(p, r)).or_insert(0) += 1;
                }
                match &anchor {
                    Some(a) if a == p => {}
                    other => out.push(Violation::AnchorDiscontinuity {
                        step: i,
                        expected: other.clone(),
                        found: p.clone(),
                    }),
                }
                anchor = Some(r.clone());
            }
            Step::Detach { r } => {
                known(&mut out, i, r);
                match anchor.take() {
                    None => out.push(Violation::DetachWithoutAttach { step: i }),
                    Some(a) if &a != r => {
                        out.push(Violation::DetachMismatch { step: i, expected: a, found: r.clone() })
                    }
                    Some(_) => {}
                }
            }
            Step::PrepareBlock { edges } => {
                for (u, v) in edges {
                    known(&mut out, i, u);
                    known(&mut out, i, v);
                    if u == v {
                        out.push(Violation::SelfLink { step: i, id: u.clone() });
                    } else {
                        *coverage.entry(norm(u, v)).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    if anchor.is_some() {
        out.push(Violation::UnclosedAttach { step: attach_step });
    }

    let mut target: HashMap<(String, String), ()> = HashMap::new();
    for (u, v) in g.edges() {
        target.insert(norm(u, v), ());
    }
    let mut scheduled: Vec<(&(String, String), &usize)> = coverage.iter().collect();
    scheduled.sort();
    for (edge, &count) in scheduled {
        if count > 1 {
            out.push(Violation::RetracedEdge(edge.0.clone(), edge.1.clone()));
        }
        if !target.contains_key(edge) {
            out.push(Violation::UnknownEdge(edge.0.clone(), edge.1.clone()));
        }
    }
    let mut missing: Vec<&(String, String)> =
        target.keys().filter(|e| !coverage.contains_key(*e)).collect();
    missing.sort();
    for edge in missing {
        out.push(Violation::UncoveredEdge(edge.0.clone(), edge.1.clone()));
    }
    out
}

/// Closed-form entangler-operation counts for the `n x n x n` cubic
/// lattice under the three generation strategies:
/// cascade `3(n-1)n^2 + 1`; block-by-block `4(n-1)n^2 - 2n + 1` for even
/// `n` and `4(n-1)n^2 - n + 1` for odd `n`; direct per-bond CZ
/// `6(n-1)n^2`.
pub fn formula_counts(n: u64) -> Result<CountReport, PlanError> {
    if n < 2 {
        return Err(PlanError::DimensionTooSmall(n));
    }
    let e = 3 * (n - 1) * n * n;
    let box_ops = if n % 2 == 0 {
        4 * (n - 1) * n * n - 2 * n + 1
    } else {
        4 * (n - 1) * n * n - n + 1
    };
    Ok(CountReport {
        cascade_ops: e + 1,
        box_ops,
        direct_ops: 2 * e,
        schedule_ops: None,
    })
}

/// Entangler invocations implied by a schedule. Attach and link cost one
/// operation each; detach is a destructive measurement and costs none.
/// A one-edge block is an ancilla-free Bell preparation (one operation);
/// a longer block of `k` edges is built by its own cascade pass
/// (attach + `k` links).
pub fn count_operations(s: &WeaveSchedule) -> u64 {
    s.steps
        .iter()
        .map(|step| match step {
            Step::Attach { .. } | Step::Link { .. } => 1,
            Step::Detach { .. } => 0,
            Step::PrepareBlock { edges } => {
                let k = edges.len() as u64;
                if k <= 1 {
                    k
                } else {
                    k + 1
                }
            }
        })
        .sum()
}

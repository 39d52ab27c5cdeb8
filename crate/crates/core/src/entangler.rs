//! The cascade entangler: attach, link and detach operations on the
//! amplitude-vector backend, a symbolic edge-set backend, schedule
//! execution and the CZ-product verification oracle.
//!
//! # Protocol
//!
//! The spider photon `a` rides along a trail. While attached it is bound
//! to the current anchor `p` in a fixed pattern: `|+>_a` accompanies
//! `|0>_p` and `|->_a` accompanies `|1>_p` — exactly a CZ bond between
//! anchor and spider. One link operation couples the qubus to photons
//! `r` and `a`, measures the difference port photon number `n`, applies
//! the feed-forward Pauli corrections and a final Hadamard on `a`. The
//! net effect installs the CZ phase on `(p, r)` and re-binds the spider
//! to `r`, whatever else `p` and `r` are entangled with — so trails may
//! revisit vertices.
//!
//! # Measurement branches and corrections
//!
//! The qubus difference port holds vacuum on the even-parity branch of
//! the coupled pair and a coherent state of mean photon number `beta^2`
//! on the odd branch, whose two components differ by the sign `(-1)^n`
//! after the projection on `|n>`. The correction tables are derived from
//! those branch signs and validated against a first-principles branch
//! oracle in the tests:
//!
//! * link, parity of `(r, a)`: `n = 0` none; `n` even nonzero `Z(p), X(a)`;
//!   `n` odd `Z(p), X(a), Z(a)`.
//! * attach, parity of `(p, a)` (the fresh anchor takes the coupling slot
//!   of `r`): `n = 0` none; `n` even nonzero `X(a)`; `n` odd `X(a), Z(a)`.
//!
//! All outcomes lead to the same post-correction state up to global
//! phase, which is what makes the protocol deterministic under
//! feed-forward. Detaching measures the spider in the computational
//! basis; outcome `1` is repaired by `Z` on the last anchor.

use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{GraphError, GraphSpec};
use crate::plan::{decompose_trails, validate_schedule, Step, Violation, WeaveSchedule};
use crate::qubus::{sample_photons_given_click, QubusParams};
use crate::state::{PureState, StateError};

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("qubus cannot register photons: alpha*sin(theta) vanishes")]
    DegenerateQubus,
    #[error("spider photon '{0}' must be fresh (|+> and unentangled) before attaching")]
    SpiderNotFresh(String),
    #[error("spider-correlation precondition violated: {0}")]
    ContractViolation(String),
    #[error("forced detach outcome must be 0 or 1, got {0}")]
    ForcedDetachBit(u64),
    #[error("invalid schedule: {}", format_violations(.0))]
    InvalidSchedule(Vec<Violation>),
    #[error("malformed schedule: {0}")]
    MalformedSchedule(#[from] GraphError),
}

/// Pauli correction operators applied by feed-forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pauli {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordedOp {
    Attach,
    Link,
    Detach,
}

/// One sampled entangler outcome with the corrections it triggered.
/// For detach records `n` is the measured spider bit.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeRecord {
    pub step: usize,
    pub op: RecordedOp,
    pub n: u64,
    pub corrections: Vec<(Pauli, String)>,
}

/// The nonlinear cascade entangler acting on the amplitude backend.
#[derive(Debug, Clone)]
pub struct CascadeEntangler {
    params: QubusParams,
    debug_checks: bool,
}

impl CascadeEntangler {
    pub fn new(params: QubusParams) -> Self {
        Self { params, debug_checks: false }
    }

    /// Enables the O(2^m) precondition scans (off by default).
    pub fn with_debug_checks(mut self, on: bool) -> Self {
        self.debug_checks = on;
        self
    }

    pub fn params(&self) -> &QubusParams {
        &self.params
    }

    /// Samples the qubus outcome for a pair whose parity feeds the
    /// difference port: 0 on the even branch, a click-conditioned Poisson
    /// draw on the odd branch.
    fn draw_outcome<R: Rng + ?Sized>(
        &self,
        state: &PureState,
        q1: &str,
        q2: &str,
        rng: &mut R,
        forced: Option<u64>,
    ) -> Result<u64, SimError> {
        if let Some(n) = forced {
            return Ok(n);
        }
        let w_even = state.parity_weight(q1, q2)?;
        if rng.random::<f64>() < w_even {
            Ok(0)
        } else {
            let mu = self.params.mean_photons();
            if mu <= 0.0 {
                return Err(SimError::DegenerateQubus);
            }
            Ok(sample_photons_given_click(mu, rng))
        }
    }

    /// Entangles a fresh spider photon `a` to photon `p`, which may carry
    /// arbitrary prior entanglement. Afterwards the spider correlation
    /// binds `a` to `p`.
    pub fn attach<R: Rng + ?Sized>(
        &self,
        state: &mut PureState,
        p: &str,
        a: &str,
        rng: &mut R,
        forced: Option<u64>,
    ) -> Result<OutcomeRecord, SimError> {
        if p == a {
            return Err(StateError::SameQubit(p.to_string()).into());
        }
        state.qubit_index(p)?;
        state.qubit_index(a)?;
        if self.debug_checks {
            check_unentangled_plus(state, a)?;
        }
        let n = self.draw_outcome(state, p, a, rng, forced)?;
        state.project_parity(p, a, n == 0)?;
        if n % 2 == 1 {
            state.apply_phase_on_pattern(&[(p, 0), (a, 1)], (-1.0).into())?;
        }
        let mut corrections = Vec::new();
        if n > 0 {
            state.apply_x(a)?;
            corrections.push((Pauli::X, a.to_string()));
            if n % 2 == 1 {
                state.apply_z(a)?;
                corrections.push((Pauli::Z, a.to_string()));
            }
        }
        state.apply_h(a)?;
        Ok(OutcomeRecord { step: 0, op: RecordedOp::Attach, n, corrections })
    }

    /// Weaves the link `(p, r)`: requires the spider correlation between
    /// `a` and the anchor `p`; afterwards the CZ phase sits on `(p, r)`
    /// and the spider is bound to `r`. `r` may carry arbitrary prior
    /// entanglement, including with `p` itself.
    pub fn link<R: Rng + ?Sized>(
        &self,
        state: &mut PureState,
        p: &str,
        r: &str,
        a: &str,
        rng: &mut R,
        forced: Option<u64>,
    ) -> Result<OutcomeRecord, SimError> {
        for (x, y) in [(p, r), (p, a), (r, a)] {
            if x == y {
                return Err(StateError::SameQubit(x.to_string()).into());
            }
        }
        state.qubit_index(p)?;
        state.qubit_index(r)?;
        state.qubit_index(a)?;
        if self.debug_checks {
            check_spider_form(state, p, a)?;
        }
        let n = self.draw_outcome(state, r, a, rng, forced)?;
        state.project_parity(r, a, n == 0)?;
        if n % 2 == 1 {
            state.apply_phase_on_pattern(&[(r, 0), (a, 1)], (-1.0).into())?;
        }
        let mut corrections = Vec::new();
        if n > 0 {
            state.apply_z(p)?;
            corrections.push((Pauli::Z, p.to_string()));
            state.apply_x(a)?;
            corrections.push((Pauli::X, a.to_string()));
            if n % 2 == 1 {
                state.apply_z(a)?;
                corrections.push((Pauli::Z, a.to_string()));
            }
        }
        state.apply_h(a)?;
        Ok(OutcomeRecord { step: 0, op: RecordedOp::Link, n, corrections })
    }

    /// Measures the spider out of the register. Outcome `1` is repaired
    /// by `Z` on the last anchor `r_last`; either way the register is
    /// left with the woven CZ bonds completed.
    pub fn detach<R: Rng + ?Sized>(
        &self,
        state: &mut PureState,
        a: &str,
        r_last: &str,
        rng: &mut R,
        forced: Option<u64>,
    ) -> Result<(u8, Vec<(Pauli, String)>), SimError> {
        if a == r_last {
            return Err(StateError::SameQubit(a.to_string()).into());
        }
        state.qubit_index(r_last)?;
        if self.debug_checks {
            check_spider_form(state, r_last, a)?;
        }
        let forced_bit = match forced {
            None => None,
            Some(b @ (0 | 1)) => Some(b as u8),
            Some(bad) => return Err(SimError::ForcedDetachBit(bad)),
        };
        let bit = state.measure_and_remove(a, rng, forced_bit)?;
        let mut corrections = Vec::new();
        if bit == 1 {
            state.apply_z(r_last)?;
            corrections.push((Pauli::Z, r_last.to_string()));
        }
        Ok((bit, corrections))
    }
}

/// Debug scan: `a` is `|+>` and unentangled iff every amplitude is
/// independent of its bit.
fn check_unentangled_plus(state: &PureState, a: &str) -> Result<(), SimError> {
    let b = 1usize << state.qubit_index(a)?;
    let amps = state.amplitudes();
    for z in 0..amps.len() {
        if z & b == 0 && (amps[z] - amps[z | b]).norm() > 1e-9 {
            return Err(SimError::SpiderNotFresh(a.to_string()));
        }
    }
    Ok(())
}

/// Debug scan of the spider correlation: the `a = 1` amplitude equals the
/// `a = 0` amplitude times `(-1)^{anchor bit}` for every basis term.
fn check_spider_form(state: &PureState, anchor: &str, a: &str) -> Result<(), SimError> {
    let ba = 1usize << state.qubit_index(a)?;
    let bp = 1usize << state.qubit_index(anchor)?;
    let amps = state.amplitudes();
    for z in 0..amps.len() {
        if z & ba == 0 {
            let sign = if z & bp != 0 { -1.0 } else { 1.0 };
            if (amps[z | ba] - amps[z] * sign).norm() > 1e-9 {
                return Err(SimError::ContractViolation(format!(
                    "spider '{}' is not correlation-bound to '{}'",
                    a, anchor
                )));
            }
        }
    }
    Ok(())
}

/// The CZ-product definition of the target state: `prod CZ |+>^V`.
pub fn graph_state_oracle(g: &GraphSpec, capacity: usize) -> Result<PureState, SimError> {
    let mut st = PureState::plus_register(g.vertices().iter().cloned(), capacity)?;
    for (u, v) in g.edges() {
        st.apply_cz(u, v)?;
    }
    Ok(st)
}

/// `|<state| prod CZ |+>^V>|^2` — verification against the defining
/// product form. The state must hold exactly the graph's vertices.
pub fn fidelity(state: &PureState, g: &GraphSpec) -> Result<f64, SimError> {
    let oracle = graph_state_oracle(g, g.vertex_count().max(state.qubit_count()))?;
    Ok(state.fidelity_with(&oracle)?)
}

/// Edge-set backend for targets too large to simulate as amplitudes.
///
/// Linking toggles the edge: retracing a woven bond destroys it, matching
/// the entangler physics (two CZ passes cancel). Valid schedules never
/// retrace, so execution just inserts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolicGraphState {
    edges: BTreeSet<(String, String)>,
    anchor: Option<String>,
}

impl SymbolicGraphState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn anchor(&self) -> Option<&str> {
        self.anchor.as_deref()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &(String, String)> {
        self.edges.iter()
    }

    pub fn edge_set(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    fn toggle(&mut self, u: &str, v: &str) {
        let key = if u <= v {
            (u.to_string(), v.to_string())
        } else {
            (v.to_string(), u.to_string())
        };
        if !self.edges.remove(&key) {
            self.edges.insert(key);
        }
    }

    pub fn apply_step(&mut self, step: &Step) {
        match step {
            Step::Attach { p } => self.anchor = Some(p.clone()),
            Step::Link { p: _, r } => {
                let anchor = self.anchor.clone().expect("link requires an attached spider");
                self.toggle(&anchor, r);
                self.anchor = Some(r.clone());
            }
            Step::Detach { .. } => self.anchor = None,
            Step::PrepareBlock { edges } => {
                for (u, v) in edges {
                    self.toggle(u, v);
                }
            }
        }
    }
}

/// Simulation backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Vector,
    Symbolic,
}

/// Execution configuration for [`run_schedule`].
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub backend: Backend,
    pub seed: u64,
    pub params: QubusParams,
    pub capacity: usize,
    /// Pinned qubus outcomes, consumed in entangler-invocation order
    /// (attach and link draws, detach bits, block-internal operations).
    /// Once exhausted, remaining outcomes are sampled from the seeded RNG.
    pub forced_outcomes: Vec<u64>,
    pub debug_checks: bool,
}

impl RunConfig {
    pub fn new(backend: Backend, seed: u64) -> Self {
        Self {
            backend,
            seed,
            params: QubusParams::default(),
            capacity: crate::state::DEFAULT_QUBIT_CAPACITY,
            forced_outcomes: Vec::new(),
            debug_checks: false,
        }
    }
}

/// Result of executing a schedule.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub backend: Backend,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(String, String)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_edges_matched: Option<bool>,
    pub outcomes: Vec<OutcomeRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    /// Final register state (vector backend only); not serialized.
    #[serde(skip)]
    pub final_state: Option<PureState>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Rebuilds the target graph implied by a schedule: vertices in
/// first-appearance order, edges from link and block steps. Isolated
/// vertices of the original target are not recoverable (and do not
/// affect fidelity, since they stay in `|+>` on both sides).
pub fn reconstruct_target(schedule: &WeaveSchedule) -> Result<GraphSpec, SimError> {
    let mut g = GraphSpec::new();
    for step in &schedule.steps {
        match step {
            Step::Attach { p } => {
                g.add_vertex(p.clone());
            }
            Step::Link { p, r } => g.add_edge(p, r)?,
            Step::Detach { r } => {
                g.add_vertex(r.clone());
            }
            Step::PrepareBlock { edges } => {
                for (u, v) in edges {
                    g.add_edge(u, v)?;
                }
            }
        }
    }
    Ok(g)
}

fn fresh_spider_label(g: &GraphSpec) -> String {
    if g.vertex_index("spider").is_none() {
        return "spider".to_string();
    }
    (1..)
        .map(|k| format!("spider.{}", k))
        .find(|l| g.vertex_index(l).is_none())
        .expect("some spider label is free")
}

struct VectorRun<'a> {
    state: PureState,
    spider: String,
    entangler: CascadeEntangler,
    rng: ChaCha12Rng,
    forced: std::vec::IntoIter<u64>,
    outcomes: Vec<OutcomeRecord>,
    touched: HashSet<String>,
    step: usize,
    _target: &'a GraphSpec,
}

impl VectorRun<'_> {
    fn next_forced(&mut self) -> Option<u64> {
        self.forced.next()
    }

    fn attach(&mut self, p: &str, a: &str) -> Result<(), SimError> {
        let forced = self.next_forced();
        let mut rec = self.entangler.attach(&mut self.state, p, a, &mut self.rng, forced)?;
        rec.step = self.step;
        self.outcomes.push(rec);
        self.touched.insert(p.to_string());
        self.touched.insert(a.to_string());
        Ok(())
    }

    fn link(&mut self, p: &str, r: &str, a: &str) -> Result<(), SimError> {
        let forced = self.next_forced();
        let mut rec = self.entangler.link(&mut self.state, p, r, a, &mut self.rng, forced)?;
        rec.step = self.step;
        self.outcomes.push(rec);
        self.touched.insert(p.to_string());
        self.touched.insert(r.to_string());
        Ok(())
    }

    fn detach(&mut self, a: &str, r: &str) -> Result<(), SimError> {
        let forced = self.next_forced();
        let (bit, corrections) =
            self.entangler.detach(&mut self.state, a, r, &mut self.rng, forced)?;
        self.outcomes.push(OutcomeRecord {
            step: self.step,
            op: RecordedOp::Detach,
            n: bit as u64,
            corrections,
        });
        Ok(())
    }

    /// Executes a spider pass over one trail: attach, links, detach.
    fn weave_trail(&mut self, vertices: &[String]) -> Result<(), SimError> {
        let spider = self.spider.clone();
        self.state.add_plus_qubit(spider.clone())?;
        self.attach(&vertices[0], &spider)?;
        for w in vertices.windows(2) {
            self.link(&w[0], &w[1], &spider)?;
        }
        self.detach(&spider, &vertices[vertices.len() - 1])?;
        Ok(())
    }

    /// Executes a building block microscopically. A single fresh-ended
    /// edge is an ancilla-free Bell preparation (the fresh photon takes
    /// the spider slot); anything longer gets its own spider pass.
    fn prepare_block(&mut self, edges: &[(String, String)]) -> Result<(), SimError> {
        let mut chain = GraphSpec::new();
        for (u, v) in edges {
            chain.add_edge(u, v)?;
        }
        for trail in decompose_trails(&chain) {
            let verts = trail.vertices();
            if trail.edge_count() == 1 {
                let (u, v) = (verts[0].as_str(), verts[1].as_str());
                if !self.touched.contains(v) {
                    self.attach(u, v)?;
                    continue;
                }
                if !self.touched.contains(u) {
                    self.attach(v, u)?;
                    continue;
                }
            }
            self.weave_trail(verts)?;
        }
        Ok(())
    }
}

/// Executes a schedule on the chosen backend. The schedule is first
/// validated structurally against its own reconstructed target; the run
/// is deterministic given the seed.
pub fn run_schedule(schedule: &WeaveSchedule, config: &RunConfig) -> Result<RunReport, SimError> {
    let target = reconstruct_target(schedule)?;
    let mut hashless = schedule.clone();
    hashless.graph_hash = String::new();
    let violations = validate_schedule(&hashless, &target);
    if !violations.is_empty() {
        return Err(SimError::InvalidSchedule(violations));
    }

    let start = Instant::now();
    match config.backend {
        Backend::Symbolic => {
            let mut sym = SymbolicGraphState::new();
            for step in &schedule.steps {
                sym.apply_step(step);
            }
            let matched = *sym.edge_set() == target.edge_name_set();
            Ok(RunReport {
                backend: Backend::Symbolic,
                seed: config.seed,
                fidelity: None,
                edges: Some(sym.edges().cloned().collect()),
                target_edges_matched: Some(matched),
                outcomes: Vec::new(),
                wall_time_ms: Some(start.elapsed().as_secs_f64() * 1e3),
                final_state: None,
            })
        }
        Backend::Vector => {
            if target.vertex_count() == 0 {
                return Ok(RunReport {
                    backend: Backend::Vector,
                    seed: config.seed,
                    fidelity: Some(1.0),
                    edges: None,
                    target_edges_matched: None,
                    outcomes: Vec::new(),
                    wall_time_ms: Some(start.elapsed().as_secs_f64() * 1e3),
                    final_state: None,
                });
            }
            let needed = target.vertex_count() + 1;
            if needed > config.capacity {
                return Err(StateError::Capacity { requested: needed, cap: config.capacity }.into());
            }
            let state =
                PureState::plus_register(target.vertices().iter().cloned(), config.capacity)?;
            let mut run = VectorRun {
                state,
                spider: fresh_spider_label(&target),
                entangler: CascadeEntangler::new(config.params)
                    .with_debug_checks(config.debug_checks),
                rng: ChaCha12Rng::seed_from_u64(config.seed),
                forced: config.forced_outcomes.clone().into_iter(),
                outcomes: Vec::new(),
                touched: HashSet::new(),
                step: 0,
                _target: &target,
            };
            for (i, step) in schedule.steps.iter().enumerate() {
                run.step = i;
                match step {
                    Step::Attach { p } => {
                        let spider = run.spider.clone();
                        run.state.add_plus_qubit(spider.clone())?;
                        run.attach(p, &spider)?;
                    }
                    Step::Link { p, r } => {
                        let spider = run.spider.clone();
                        run.link(p, r, &spider)?;
                    }
                    Step::Detach { r } => {
                        let spider = run.spider.clone();
                        run.detach(&spider, r)?;
                    }
                    Step::PrepareBlock { edges } => run.prepare_block(edges)?,
                }
            }
            let fid = fidelity(&run.state, &target)?;
            Ok(RunReport {
                backend: Backend::Vector,
                seed: config.seed,
                fidelity: Some(fid),
                edges: None,
                target_edges_matched: None,
                outcomes: run.outcomes,
                wall_time_ms: Some(start.elapsed().as_secs_f64() * 1e3),
                final_state: Some(run.state),
            })
        }
    }
}

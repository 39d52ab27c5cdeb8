//! Planning and simulation of spider-photon weaving for photonic graph
//! states.
//!
//! A graph state is the result of applying a CZ gate across every edge of
//! a target graph to qubits prepared in `|+>`. This crate plans how a
//! cascade entangler builds such states — one ancilla "spider" photon
//! weaving entanglement links along edge-disjoint trails — and simulates
//! the execution on two backends:
//!
//! * a microscopically faithful amplitude-vector simulation of the
//!   entangler, including sampled qubus measurement outcomes and the
//!   feed-forward Pauli corrections;
//! * a symbolic edge-set backend for targets too large to hold as
//!   amplitudes.
//!
//! Also included: the coherent-state qubus/QND numerical model with its
//! closed-form and summed error probabilities, a probabilistic
//! linear-optics variant of the entangler, lattice target generators and
//! resource counting.

pub mod entangler;
pub mod graph;
pub mod optics;
pub mod plan;
pub mod qubus;
pub mod state;

pub use entangler::{
    fidelity, graph_state_oracle, reconstruct_target, run_schedule, Backend, CascadeEntangler,
    OutcomeRecord, Pauli, RecordedOp, RunConfig, RunReport, SimError, SymbolicGraphState,
};
pub use graph::{make_lattice, GraphError, GraphSpec, LatticeKind};
pub use optics::{pbs_parity_attempt, simulate_string, LinearTrialConfig, StringReport};
pub use plan::{
    count_operations, decompose_trails, formula_counts, min_trail_count, plan_schedule,
    validate_schedule, CountReport, PlanError, PlannerOptions, Step, Trail, Violation,
    WeaveSchedule,
};
pub use qubus::{
    bs_50_50, no_click_prob, poisson_pmf, qnd_error_formula, qnd_error_sum, sample_qnd, xpm_shift,
    ParamError, ProbeModel, QndReading, QubusParams,
};
pub use state::{PureState, StateError, DEFAULT_QUBIT_CAPACITY};

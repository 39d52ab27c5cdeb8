//! Probabilistic linear-optical variant of the cascade entangler.
//!
//! Polarizing beam splitters act as parity gates: interfering the spider
//! photon with a string photon and post-selecting on a coincidence
//! projects the pair onto its even-parity subspace. That projection is
//! exactly the `n = 0` branch of the nonlinear entangler, so with the
//! Hadamards on the ancilla between beam splitters the successful runs
//! produce the same states, deterministically up to post-selection. Each
//! gate succeeds with the even-parity weight (1/2 on symmetric inputs),
//! so a string of `n` photons completes with probability `1/2^n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::entangler::{fidelity, SimError};
use crate::graph::GraphSpec;
use crate::state::{PureState, DEFAULT_QUBIT_CAPACITY};

/// Monte-Carlo configuration for linear-optical string generation.
#[derive(Debug, Clone)]
pub struct LinearTrialConfig {
    /// Photons in the target string (>= 2).
    pub string_length: usize,
    pub trials: u64,
    pub seed: u64,
    /// Verify successful outputs against the cluster-state oracle.
    pub check_states: bool,
    pub capacity: usize,
}

impl LinearTrialConfig {
    pub fn new(string_length: usize, trials: u64, seed: u64) -> Self {
        Self {
            string_length,
            trials,
            seed,
            check_states: true,
            capacity: DEFAULT_QUBIT_CAPACITY,
        }
    }
}

/// Aggregate result of the Monte-Carlo runs.
#[derive(Debug, Clone, Serialize)]
pub struct StringReport {
    pub n: usize,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    /// `2^n`: expected attempts per completed string.
    pub expected_attempts: f64,
    /// Minimum oracle fidelity over all successful outputs, when state
    /// checks are enabled and at least one attempt succeeded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_fidelity_on_success: Option<f64>,
}

/// One polarizing-beam-splitter parity gate between `p` and the ancilla.
///
/// Succeeds with the even-parity weight of the pair; on success the state
/// is projected onto even parity and renormalized. On failure the state
/// is left untouched and must be discarded by the caller (the photons are
/// consumed by the failed coincidence).
pub fn pbs_parity_attempt<R: Rng + ?Sized>(
    state: &mut PureState,
    p: &str,
    a: &str,
    rng: &mut R,
    forced: Option<bool>,
) -> Result<bool, SimError> {
    let w_even = state.parity_weight(p, a)?;
    let success = match forced {
        Some(s) => s,
        None => rng.random::<f64>() < w_even,
    };
    if success {
        state.project_parity(p, a, true)?;
    }
    Ok(success)
}

/// Path graph `q0 - q1 - ... - q{n-1}`.
fn string_target(n: usize) -> GraphSpec {
    let mut g = GraphSpec::new();
    for i in 0..n.saturating_sub(1) {
        g.add_edge(&format!("q{}", i), &format!("q{}", i + 1))
            .expect("path edges are distinct");
    }
    if n == 1 {
        g.add_vertex("q0");
    }
    g
}

/// Runs repeated attempts at weaving an `n`-photon string with the
/// linear-optical cascade. A string attempt runs one parity gate per
/// photon (attach plus `n - 1` links), each followed by a Hadamard on
/// the ancilla; one failed gate discards the attempt. Successful runs
/// end with the ancilla measured out and corrected.
pub fn simulate_string(cfg: &LinearTrialConfig) -> Result<StringReport, SimError> {
    assert!(cfg.string_length >= 2, "a string needs at least two photons");
    let n = cfg.string_length;
    let labels: Vec<String> = (0..n).map(|i| format!("q{}", i)).collect();
    let target = string_target(n);
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut successes = 0u64;
    let mut min_fidelity: Option<f64> = None;

    for _ in 0..cfg.trials {
        let mut state = PureState::plus_register(labels.clone(), cfg.capacity)?;
        state.add_plus_qubit("anc")?;
        let mut all_ok = true;
        for q in &labels {
            if pbs_parity_attempt(&mut state, q, "anc", &mut rng, None)? {
                state.apply_h("anc")?;
            } else {
                all_ok = false;
                break;
            }
        }
        if !all_ok {
            continue;
        }
        successes += 1;
        // coincidence complete: measure the ancilla out
        let bit = state.measure_and_remove("anc", &mut rng, None)?;
        if bit == 1 {
            state.apply_z(&labels[n - 1])?;
        }
        if cfg.check_states {
            let f = fidelity(&state, &target)?;
            min_fidelity = Some(min_fidelity.map_or(f, |m: f64| m.min(f)));
        }
    }

    Ok(StringReport {
        n,
        trials: cfg.trials,
        successes,
        rate: successes as f64 / cfg.trials as f64,
        expected_attempts: (2.0f64).powi(n as i32),
        state_fidelity_on_success: min_fidelity,
    })
}

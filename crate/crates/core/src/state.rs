//! Dense amplitude-vector simulation of labeled polarization qubits.
//!
//! Basis convention: `|0> = |H>`, `|1> = |V>`; the qubit at label
//! position `i` owns bit `i` of the amplitude index, least significant
//! bit first. A register of `m` qubits holds `2^m` complex amplitudes,
//! so the configurable qubit capacity (default 22) caps memory at a few
//! hundred MB.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Default upper bound on the register width (about 4M amplitudes).
pub const DEFAULT_QUBIT_CAPACITY: usize = 22;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("register of {requested} qubits exceeds the capacity of {cap} qubits")]
    Capacity { requested: usize, cap: usize },
    #[error("unknown qubit label '{0}'")]
    UnknownQubit(String),
    #[error("duplicate qubit label '{0}'")]
    DuplicateLabel(String),
    #[error("a register needs at least one qubit")]
    Empty,
    #[error("operation needs two distinct qubits, got '{0}' twice")]
    SameQubit(String),
    #[error("qubit label sets differ: cannot compare states")]
    LabelMismatch,
    #[error("projection weight {weight:.3e} is numerically zero; the requested branch cannot occur")]
    ImpossibleBranch { weight: f64 },
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A pure state over labeled qubits.
#[derive(Debug, Clone)]
pub struct PureState {
    labels: Vec<String>,
    amps: Vec<Complex64>,
    capacity: usize,
}

impl PureState {
    /// Uniform superposition `|+>^m` over the given labels.
    pub fn plus_register<I, S>(labels: I, capacity: usize) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(StateError::Empty);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(StateError::DuplicateLabel(l.clone()));
            }
        }
        if labels.len() > capacity {
            return Err(StateError::Capacity { requested: labels.len(), cap: capacity });
        }
        let m = labels.len();
        let a = 1.0 / ((1u64 << m) as f64).sqrt();
        Ok(Self {
            labels,
            amps: vec![Complex64::new(a, 0.0); 1 << m],
            capacity,
        })
    }

    /// Computational basis state `|bits>` (bit i for label i).
    pub fn basis_state<I, S>(labels: I, bits: u64, capacity: usize) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut st = Self::plus_register(labels, capacity)?;
        let m = st.labels.len();
        st.amps = vec![Complex64::ZERO; 1 << m];
        st.amps[(bits & ((1u64 << m) - 1)) as usize] = Complex64::ONE;
        Ok(st)
    }

    pub fn qubit_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn qubit_index(&self, label: &str) -> Result<usize, StateError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| StateError::UnknownQubit(label.to_string()))
    }

    pub fn has_qubit(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    /// Appends a fresh qubit in `|+>` at the most significant bit.
    pub fn add_plus_qubit(&mut self, label: impl Into<String>) -> Result<(), StateError> {
        let label = label.into();
        if self.has_qubit(&label) {
            return Err(StateError::DuplicateLabel(label));
        }
        let m = self.labels.len();
        if m + 1 > self.capacity {
            return Err(StateError::Capacity { requested: m + 1, cap: self.capacity });
        }
        let mut next = vec![Complex64::ZERO; 1 << (m + 1)];
        let half = 1usize << m;
        for i in 0..half {
            let a = self.amps[i] * SQRT_HALF;
            next[i] = a;
            next[i | half] = a;
        }
        self.amps = next;
        self.labels.push(label);
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn renormalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    pub fn apply_h(&mut self, label: &str) -> Result<(), StateError> {
        let b = 1usize << self.qubit_index(label)?;
        for i in 0..self.amps.len() {
            if i & b == 0 {
                let j = i | b;
                let (a0, a1) = (self.amps[i], self.amps[j]);
                self.amps[i] = (a0 + a1) * SQRT_HALF;
                self.amps[j] = (a0 - a1) * SQRT_HALF;
            }
        }
        Ok(())
    }

    pub fn apply_x(&mut self, label: &str) -> Result<(), StateError> {
        let b = 1usize << self.qubit_index(label)?;
        for i in 0..self.amps.len() {
            if i & b == 0 {
                self.amps.swap(i, i | b);
            }
        }
        Ok(())
    }

    pub fn apply_z(&mut self, label: &str) -> Result<(), StateError> {
        let b = 1usize << self.qubit_index(label)?;
        for i in 0..self.amps.len() {
            if i & b != 0 {
                self.amps[i] = -self.amps[i];
            }
        }
        Ok(())
    }

    /// Controlled-Z: phase -1 on the `|11>` component of the pair.
    pub fn apply_cz(&mut self, q1: &str, q2: &str) -> Result<(), StateError> {
        if q1 == q2 {
            return Err(StateError::SameQubit(q1.to_string()));
        }
        let b1 = 1usize << self.qubit_index(q1)?;
        let b2 = 1usize << self.qubit_index(q2)?;
        let both = b1 | b2;
        for i in 0..self.amps.len() {
            if i & both == both {
                self.amps[i] = -self.amps[i];
            }
        }
        Ok(())
    }

    /// Probability weight of the even-parity subspace of `(q1, q2)`
    /// (bits equal).
    pub fn parity_weight(&self, q1: &str, q2: &str) -> Result<f64, StateError> {
        if q1 == q2 {
            return Err(StateError::SameQubit(q1.to_string()));
        }
        let b1 = 1usize << self.qubit_index(q1)?;
        let b2 = 1usize << self.qubit_index(q2)?;
        let mut w = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            if (i & b1 == 0) == (i & b2 == 0) {
                w += a.norm_sqr();
            }
        }
        Ok(w)
    }

    /// Projects onto the even (bits equal) or odd parity subspace of
    /// `(q1, q2)` and renormalizes. Returns the weight the branch had.
    pub fn project_parity(&mut self, q1: &str, q2: &str, even: bool) -> Result<f64, StateError> {
        let w_even = self.parity_weight(q1, q2)?;
        let w = if even { w_even } else { 1.0 - w_even };
        if w < 1e-12 {
            return Err(StateError::ImpossibleBranch { weight: w });
        }
        let b1 = 1usize << self.qubit_index(q1)?;
        let b2 = 1usize << self.qubit_index(q2)?;
        for (i, a) in self.amps.iter_mut().enumerate() {
            let is_even = (i & b1 == 0) == (i & b2 == 0);
            if is_even != even {
                *a = Complex64::ZERO;
            }
        }
        self.renormalize();
        Ok(w)
    }

    /// Multiplies by `phase` every amplitude whose bits match `pattern`
    /// (a list of `(label, bit)` constraints).
    pub fn apply_phase_on_pattern(
        &mut self,
        pattern: &[(&str, u8)],
        phase: Complex64,
    ) -> Result<(), StateError> {
        let mut mask = 0usize;
        let mut want = 0usize;
        for &(label, bit) in pattern {
            let b = 1usize << self.qubit_index(label)?;
            mask |= b;
            if bit != 0 {
                want |= b;
            }
        }
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == want {
                *a *= phase;
            }
        }
        Ok(())
    }

    /// Probability of measuring `1` on the labeled qubit.
    pub fn prob_one(&self, label: &str) -> Result<f64, StateError> {
        let b = 1usize << self.qubit_index(label)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & b != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Computational-basis measurement that keeps the qubit in the
    /// register (projects and renormalizes).
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        label: &str,
        rng: &mut R,
        forced: Option<u8>,
    ) -> Result<u8, StateError> {
        let p1 = self.prob_one(label)?;
        let bit = match forced {
            Some(b) => {
                let w = if b == 0 { 1.0 - p1 } else { p1 };
                if w < 1e-12 {
                    return Err(StateError::ImpossibleBranch { weight: w });
                }
                b & 1
            }
            None => u8::from(rng.random::<f64>() < p1),
        };
        let b = 1usize << self.qubit_index(label)?;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & b != 0) as u8) != bit {
                *a = Complex64::ZERO;
            }
        }
        self.renormalize();
        Ok(bit)
    }

    /// Measures the qubit and removes it from the register.
    pub fn measure_and_remove<R: Rng + ?Sized>(
        &mut self,
        label: &str,
        rng: &mut R,
        forced: Option<u8>,
    ) -> Result<u8, StateError> {
        if self.labels.len() == 1 {
            return Err(StateError::Empty);
        }
        let bit = self.measure(label, rng, forced)?;
        let k = self.qubit_index(label)?;
        let b = 1usize << k;
        let low = b - 1;
        let m = self.labels.len();
        let mut next = vec![Complex64::ZERO; 1 << (m - 1)];
        for (j, slot) in next.iter_mut().enumerate() {
            // re-insert bit k with the measured value to find the source index
            let src = (j & low) | ((j & !low) << 1) | if bit != 0 { b } else { 0 };
            *slot = self.amps[src];
        }
        self.amps = next;
        self.labels.remove(k);
        Ok(bit)
    }

    /// Inner product `<self|other>`, aligning qubits by label (the two
    /// registers may list the same labels in different orders).
    pub fn overlap(&self, other: &Self) -> Result<Complex64, StateError> {
        if self.labels.len() != other.labels.len() {
            return Err(StateError::LabelMismatch);
        }
        let mut perm = Vec::with_capacity(self.labels.len());
        for l in &self.labels {
            perm.push(other.qubit_index(l).map_err(|_| StateError::LabelMismatch)?);
        }
        let identity = perm.iter().enumerate().all(|(i, &p)| i == p);
        let mut acc = Complex64::ZERO;
        if identity {
            for (a, b) in self.amps.iter().zip(&other.amps) {
                acc += a.conj() * b;
            }
        } else {
            for (z, a) in self.amps.iter().enumerate() {
                let mut zo = 0usize;
                for (i, &p) in perm.iter().enumerate() {
                    if z >> i & 1 == 1 {
                        zo |= 1 << p;
                    }
                }
                acc += a.conj() * other.amps[zo];
            }
        }
        Ok(acc)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity_with(&self, other: &Self) -> Result<f64, StateError> {
        Ok(self.overlap(other)?.norm_sqr())
    }
}

#[cfg(test)]
impl PureState {
    /// Test-only: overwrite the raw amplitudes (oracles build states
    /// directly from branch algebra).
    pub(crate) fn set_amplitudes_for_test(&mut self, amps: Vec<Complex64>) {
        assert_eq!(amps.len(), self.amps.len());
        self.amps = amps;
    }

    pub(crate) fn normalize_for_test(&mut self) {
        self.renormalize();
    }
}

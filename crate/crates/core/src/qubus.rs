//! Numerical model of the coherent-state qubus and its QND readout.
//!
//! The entangler couples two qubus beams of amplitude `alpha` to the
//! photons via cross-phase modulation with conditional phase `theta`.
//! After a 50:50 beam splitter the difference port carries either vacuum
//! (even-parity branch) or a coherent state of magnitude
//! `beta = sqrt(2) * alpha * sin(theta)` (odd-parity branch). A QND module
//! reads that port out with a probe beam of amplitude `gamma` and a
//! non-resolving detector of efficiency `eta`: `n` photons shift the probe
//! by `n * theta`, moving `gamma^2 * (1 - cos(n*theta))` of probe intensity
//! onto the detector.
//!
//! Two probe intensity models are exposed: the exact `cosine` form above
//! and a `linearized` form `n * gamma^2 * theta^2 / 2` that is linear in
//! `n`. Summing Poisson outcome statistics against the linearized model
//! collapses, via the Poisson generating function, to the closed-form
//! miss probability `qnd_error_formula`; the cosine model quantifies how
//! far that closed form sits from the exact small-`theta` physics.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("alpha must be non-negative, got {0}")]
    Alpha(f64),
    #[error("theta must lie in (0, pi/2), got {0}")]
    Theta(f64),
    #[error("gamma must be non-negative, got {0}")]
    Gamma(f64),
    #[error("eta must lie in [0, 1], got {0}")]
    Eta(f64),
}

/// Coherent-state parameters of the qubus and its QND probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubusParams {
    alpha: f64,
    theta: f64,
    gamma: f64,
    eta: f64,
}

impl QubusParams {
    pub fn new(alpha: f64, theta: f64, gamma: f64, eta: f64) -> Result<Self, ParamError> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(ParamError::Alpha(alpha));
        }
        if !theta.is_finite() || theta <= 0.0 || theta >= std::f64::consts::FRAC_PI_2 {
            return Err(ParamError::Theta(theta));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(ParamError::Gamma(gamma));
        }
        if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
            return Err(ParamError::Eta(eta));
        }
        Ok(Self { alpha, theta, gamma, eta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Difference-port amplitude of the odd-parity branch:
    /// `sqrt(2) * alpha * sin(theta)`.
    pub fn beta(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.alpha * self.theta.sin()
    }

    /// Mean photon number of the odd-parity difference port, `beta^2`.
    pub fn mean_photons(&self) -> f64 {
        let b = self.beta();
        b * b
    }

    /// Probe intensity reaching the detector when `n` photons occupy the
    /// difference port.
    pub fn probe_intensity(&self, model: ProbeModel, n: u64) -> f64 {
        let g2 = self.gamma * self.gamma;
        match model {
            ProbeModel::Linearized => n as f64 * g2 * self.theta * self.theta / 2.0,
            ProbeModel::Cosine => g2 * (1.0 - (n as f64 * self.theta).cos()),
        }
    }
}

impl Default for QubusParams {
    /// Deterministic-regime defaults: `alpha*sin(theta) ~ 4` and
    /// `gamma*theta = 10` at `theta = 0.01`.
    fn default() -> Self {
        QubusParams::new(400.0, 0.01, 1000.0, 1.0).expect("defaults are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeModel {
    Linearized,
    Cosine,
}

/// Cross-phase modulation of a coherent amplitude: `amp * e^{i*theta}`.
pub fn xpm_shift(amp: num_complex::Complex64, theta: f64) -> num_complex::Complex64 {
    amp * num_complex::Complex64::from_polar(1.0, theta)
}

/// 50:50 beam splitter on coherent amplitudes:
/// `(a1, a2) -> ((a1 - a2)/sqrt(2), (a1 + a2)/sqrt(2))`.
pub fn bs_50_50(
    a1: num_complex::Complex64,
    a2: num_complex::Complex64,
) -> (num_complex::Complex64, num_complex::Complex64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ((a1 - a2) * s, (a1 + a2) * s)
}

/// Poisson probability mass `e^{-mu} mu^n / n!`, computed in log space.
pub fn poisson_pmf(mean_photons: f64, n: u64) -> f64 {
    assert!(mean_photons >= 0.0, "mean photon number must be non-negative");
    if mean_photons == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let mut ln_p = -mean_photons;
    for k in 1..=n {
        ln_p += mean_photons.ln() - (k as f64).ln();
    }
    ln_p.exp()
}

/// Probability that a non-resolving detector of efficiency `eta` stays
/// silent on a coherent probe of intensity `zeta_sq`: the no-click POVM
/// element has expectation `e^{-eta * zeta_sq}` under Poisson statistics.
pub fn no_click_prob(zeta_sq: f64, eta: f64) -> f64 {
    (-eta * zeta_sq).exp()
}

/// Closed-form miss probability of one QND readout:
/// `exp{-2 (1 - e^{-eta gamma^2 theta^2 / 2}) alpha^2 sin^2(theta)}`.
pub fn qnd_error_formula(p: &QubusParams) -> f64 {
    let s = p.alpha * p.theta.sin();
    let inner = 1.0 - (-0.5 * p.eta * p.gamma * p.gamma * p.theta * p.theta).exp();
    (-2.0 * inner * s * s).exp()
}

/// Miss probability by direct summation: Poisson photon statistics of the
/// difference port weighted by the no-click probability of the probe.
///
/// The series is truncated once the Poisson tail contributes less than
/// 1e-15 of the accumulated value; terms are combined in log space so the
/// result stays accurate even when it is far below 1.
pub fn qnd_error_sum(p: &QubusParams, model: ProbeModel) -> f64 {
    let mu = p.mean_photons();
    if mu == 0.0 {
        // Only n = 0 occurs and a vacuum difference port never clicks.
        return 1.0;
    }
    let ln_mu = mu.ln();
    let mut ln_terms: Vec<f64> = Vec::new();
    let mut ln_poisson = 0.0_f64; // ln(mu^n / n!) running value
    let mut max_ln = f64::NEG_INFINITY;
    let mut n: u64 = 0;
    loop {
        let ln_pn = ln_poisson - mu;
        let ln_t = ln_pn - p.eta * p.probe_intensity(model, n);
        ln_terms.push(ln_t);
        max_ln = max_ln.max(ln_t);
        // Beyond 2*mu + 20 the Poisson ratio is < 1/2, so once the raw
        // Poisson mass (an upper bound on the term, factors <= 1) drops
        // 40 e-folds under the running maximum the remainder is dwarfed.
        if n as f64 >= 2.0 * mu + 20.0 && ln_pn < max_ln - 40.0 {
            break;
        }
        n += 1;
        ln_poisson += ln_mu - (n as f64).ln();
    }
    let sum: f64 = ln_terms.iter().map(|&lt| (lt - max_ln).exp()).sum();
    (max_ln + sum.ln()).exp()
}

/// Reading of the QND module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QndReading {
    Zero,
    Nonzero(u64),
}

/// Simulates one QND readout for a true photon number `n_true`.
///
/// A vacuum port never clicks. An occupied port is missed (read as zero)
/// with the no-click probability of the shifted probe, using the
/// linearized intensity model, and otherwise reported faithfully.
pub fn sample_qnd<R: Rng + ?Sized>(n_true: u64, p: &QubusParams, rng: &mut R) -> QndReading {
    if n_true == 0 {
        return QndReading::Zero;
    }
    let miss = no_click_prob(p.probe_intensity(ProbeModel::Linearized, n_true), p.eta);
    if rng.random::<f64>() < miss {
        QndReading::Zero
    } else {
        QndReading::Nonzero(n_true)
    }
}

/// Draws a photon number from Poisson(`mu`) conditioned on `n >= 1`,
/// by inverse-CDF walk. For the huge means far outside the protocol
/// regime (`mu > 600`) a rounded normal approximation is used instead,
/// where the conditioning is vacuous anyway.
pub fn sample_photons_given_click<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    assert!(mu > 0.0, "odd-branch sampling needs a nonzero mean photon number");
    if mu > 600.0 {
        let z: f64 = {
            // Box-Muller from two uniforms.
            let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        return (mu + mu.sqrt() * z).round().max(1.0) as u64;
    }
    let p0 = (-mu).exp();
    let target = rng.random::<f64>() * (1.0 - p0);
    let mut n: u64 = 1;
    let mut pn = mu * p0; // Poisson pmf at n = 1
    let mut cum = pn;
    while cum <= target {
        n += 1;
        pn *= mu / n as f64;
        cum += pn;
        if pn < f64::MIN_POSITIVE {
            break; // numerical tail guard
        }
    }
    n
}

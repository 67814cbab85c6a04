//! Approximate optimal states, entanglement entropy and relative entropy to
//! the maximally entangled state.

use crate::error::{Error, Result};
use crate::model::{Scenario, SchmidtVector};
use crate::sum::{self, CompensatedSum};

/// Closed-form approximation of the most non-classical state,
/// `λ_k ∝ [(k+1)(d−k)]^{−1/N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxState {
    pub scenario: Scenario,
    /// `Σ_j [(j+1)(d−j)]^{−2/N}`.
    pub normalization: f64,
    pub vector: SchmidtVector,
}

pub fn approx_state(scenario: Scenario) -> ApproxState {
    let d = scenario.n_outcomes();
    let exponent = -1.0 / scenario.n_settings() as f64;
    // (k+1)(d−k) is symmetric under k ↦ d−1−k, so the vector is exactly
    // palindromic.
    let raw: Vec<f64> = (0..d)
        .map(|k| ((k as f64 + 1.0) * (d - k) as f64).powf(exponent))
        .collect();
    let normalization = sum::sum(raw.iter().map(|u| u * u));
    let scale = normalization.sqrt();
    let coefficients = raw.into_iter().map(|u| u / scale).collect();
    ApproxState {
        scenario,
        normalization,
        vector: SchmidtVector::from_unit_unchecked(coefficients),
    }
}

/// Entanglement entropy in dits, `−Σ λ_k² ln λ_k² / ln d`, with `0·ln 0 = 0`.
pub fn entropy(state: &SchmidtVector) -> Result<f64> {
    let d = state.dim();
    if d < 2 {
        return Err(Error::EntropyUndefined);
    }
    let h: CompensatedSum = state
        .weights()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .collect();
    Ok(h.value() / (d as f64).ln())
}

/// `KL(uniform ‖ λ²) = −(1/d) Σ_j ln(d λ_j²)`, natural log. Infinite if any
/// coefficient vanishes.
pub fn kl_vs_maxent(state: &SchmidtVector) -> f64 {
    let d = state.dim() as f64;
    if state.coefficients().contains(&0.0) {
        return f64::INFINITY;
    }
    let s: CompensatedSum = state.weights().map(|p| (d * p).ln()).collect();
    -s.value() / d
}

/// Entropy and KL of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub entropy_dits: f64,
    pub kl_vs_maxent: f64,
}

impl EntropyReport {
    pub fn of(state: &SchmidtVector) -> Result<Self> {
        Ok(Self {
            entropy_dits: entropy(state)?,
            kl_vs_maxent: kl_vs_maxent(state),
        })
    }
}

//! Scenarios, Schmidt-basis states and measurement phases.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::sum;

/// One inequality instance: `N` measurement settings per party, `d` outcomes
/// per measurement. The local Hilbert-space dimension always equals `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scenario {
    n_settings: usize,
    n_outcomes: usize,
}

impl Scenario {
    pub fn new(n_settings: usize, n_outcomes: usize) -> Result<Self> {
        // With a single setting the expression is identically 1.
        if n_settings < 2 {
            return Err(Error::TooFewSettings(n_settings));
        }
        if n_outcomes < 1 {
            return Err(Error::TooFewOutcomes(n_outcomes));
        }
        Ok(Self {
            n_settings,
            n_outcomes,
        })
    }

    /// Number of settings `N`.
    #[inline]
    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    /// Number of outcomes `d`.
    #[inline]
    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(N={}, d={})", self.n_settings, self.n_outcomes)
    }
}

/// Free-function form of [`Scenario::new`].
pub fn make_scenario(n_settings: usize, n_outcomes: usize) -> Result<Scenario> {
    Scenario::new(n_settings, n_outcomes)
}

/// Tolerance on `|‖λ‖ - 1|` accepted by [`validate_schmidt`] without the
/// renormalize flag.
pub const NORM_ACCEPT_TOLERANCE: f64 = 1e-9;

/// Unit-norm, non-negative Schmidt coefficients `λ_0 … λ_{d-1}` of a pure
/// state `Σ_k λ_k |kk⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtVector {
    coefficients: Vec<f64>,
}

impl SchmidtVector {
    /// Strict validation: non-negative entries, norm within
    /// [`NORM_ACCEPT_TOLERANCE`] of one.
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        validate_schmidt(coefficients, Validation::default())
    }

    /// Trusted constructor for vectors already known to be unit-norm and
    /// non-negative.
    pub(crate) fn from_unit_unchecked(coefficients: Vec<f64>) -> Self {
        debug_assert!(!coefficients.is_empty());
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    /// Dimension `d`.
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    /// Schmidt weights `λ_k²`.
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.coefficients.iter().map(|c| c * c)
    }

    /// Largest `|λ_k - λ_{d-1-k}|`.
    pub fn palindrome_deviation(&self) -> f64 {
        let c = &self.coefficients;
        c.iter()
            .zip(c.iter().rev())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// The same state with the coefficient order reversed.
    pub fn reversed(&self) -> Self {
        let mut c = self.coefficients.clone();
        c.reverse();
        Self { coefficients: c }
    }
}

/// Flags for [`validate_schmidt`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Validation {
    /// Divide by the norm instead of rejecting off-norm input.
    pub renormalize: bool,
    /// Reject negative entries. When unset, an overall sign flip is applied
    /// if the entries sum negative and the remaining signs are dropped
    /// (`|λ_k|` are the Schmidt coefficients of `Σ λ_k |kk⟩`).
    pub strict_sign: bool,
}

impl Default for Validation {
    fn default() -> Self {
        Self {
            renormalize: false,
            strict_sign: true,
        }
    }
}

/// Validate (and optionally renormalize) a coefficient list.
pub fn validate_schmidt(mut coefficients: Vec<f64>, mode: Validation) -> Result<SchmidtVector> {
    if coefficients.is_empty() {
        return Err(Error::EmptyState);
    }
    if let Some(index) = coefficients.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFiniteCoefficient { index });
    }
    if mode.strict_sign {
        if let Some(index) = coefficients.iter().position(|&c| c < 0.0) {
            return Err(Error::NegativeCoefficient {
                index,
                value: coefficients[index],
            });
        }
    } else {
        if sum::sum(coefficients.iter().copied()) < 0.0 {
            coefficients.iter_mut().for_each(|c| *c = -*c);
        }
        coefficients.iter_mut().for_each(|c| *c = c.abs());
    }

    let norm = sum::norm(&coefficients);
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let deviation = (norm - 1.0).abs();
    if deviation > NORM_ACCEPT_TOLERANCE && !mode.renormalize {
        return Err(Error::NotNormalized { norm });
    }
    if deviation > 1e-12 {
        coefficients.iter_mut().for_each(|c| *c /= norm);
    }
    Ok(SchmidtVector { coefficients })
}

/// The maximally entangled state, `λ_k = 1/√d`.
pub fn maxent_state(d: usize) -> Result<SchmidtVector> {
    if d < 1 {
        return Err(Error::TooFewOutcomes(d));
    }
    let c = 1.0 / (d as f64).sqrt();
    Ok(SchmidtVector {
        coefficients: vec![c; d],
    })
}

/// Phase offsets of the measurement bases
/// `|a⟩_x = d^{-1/2} Σ_k ω^{k(a+α_x)} |k⟩` and
/// `|b⟩_y = d^{-1/2} Σ_k ω^{k(-b+β_y)} |k⟩`, with `ω = e^{2πi/d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPhases {
    /// `α_x = x/N`.
    pub alpha: Vec<f64>,
    /// `β_y = (1-2y)/(2N)`.
    pub beta: Vec<f64>,
    /// `2π/d`, the argument of `ω`.
    pub omega_exponent: f64,
}

impl MeasurementPhases {
    /// `α_x + β_y`, the only combination the statistics depend on.
    #[inline]
    pub fn offset(&self, x: usize, y: usize) -> f64 {
        self.alpha[x] + self.beta[y]
    }
}

pub fn phases(scenario: &Scenario) -> MeasurementPhases {
    let n = scenario.n_settings();
    let nf = n as f64;
    MeasurementPhases {
        alpha: (0..n).map(|x| x as f64 / nf).collect(),
        beta: (0..n)
            .map(|y| (1.0 - 2.0 * y as f64) / (2.0 * nf))
            .collect(),
        omega_exponent: 2.0 * PI / scenario.n_outcomes() as f64,
    }
}

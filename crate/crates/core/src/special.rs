//! Trigamma and log-gamma for positive real arguments.
//!
//! Both use the same scheme: shift the argument upwards with the recurrence
//! until it is large, then sum the asymptotic (Bernoulli) series.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Catalan's constant `G = Σ (−1)^k / (2k+1)²`.
pub const CATALAN: f64 = 0.915_965_594_177_219;

/// Accuracy knobs for the series evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFunctionBudget {
    /// Asymptotic terms smaller than this are dropped.
    pub target_abs_error: f64,
    /// Arguments are shifted up to at least this value before the
    /// asymptotic series is used.
    pub recurrence_shift_threshold: f64,
}

impl Default for SpecialFunctionBudget {
    fn default() -> Self {
        Self {
            target_abs_error: 1e-12,
            recurrence_shift_threshold: 10.0,
        }
    }
}

impl SpecialFunctionBudget {
    fn check(&self) -> Result<()> {
        if !(self.target_abs_error > 0.0) {
            return Err(Error::InvalidArgument(
                "target_abs_error must be > 0".into(),
            ));
        }
        if !(self.recurrence_shift_threshold >= 1.0) {
            return Err(Error::InvalidArgument(
                "recurrence_shift_threshold must be ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

/// `B_2, B_4, …, B_12`.
const BERNOULLI: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

fn check_positive(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "argument must be a positive finite real (got {z})"
        )));
    }
    Ok(())
}

/// `ψ₁(z) = d²/dz² ln Γ(z) = Σ_{j≥0} (z+j)⁻²` for `z > 0`.
pub fn trigamma(z: f64) -> Result<f64> {
    trigamma_with(z, &SpecialFunctionBudget::default())
}

pub fn trigamma_with(mut z: f64, budget: &SpecialFunctionBudget) -> Result<f64> {
    check_positive(z)?;
    budget.check()?;
    let mut shifted = 0.0;
    while z < budget.recurrence_shift_threshold {
        shifted += 1.0 / (z * z);
        z += 1.0;
    }
    // ψ₁(z) ~ 1/z + 1/(2z²) + Σ B_2n / z^{2n+1}
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut tail = 0.0;
    let mut power = inv * inv2;
    for b in BERNOULLI {
        let term = b * power;
        tail += term;
        if term.abs() < budget.target_abs_error * 1e-3 {
            break;
        }
        power *= inv2;
    }
    Ok(shifted + inv + 0.5 * inv2 + tail)
}

/// `ln Γ(x)` for `x > 0` (Stirling series after an upward shift).
pub fn ln_gamma(x: f64) -> Result<f64> {
    ln_gamma_with(x, &SpecialFunctionBudget::default())
}

pub fn ln_gamma_with(mut x: f64, budget: &SpecialFunctionBudget) -> Result<f64> {
    check_positive(x)?;
    budget.check()?;
    let mut shift = 0.0;
    while x < budget.recurrence_shift_threshold {
        shift += x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut power = inv;
    for (i, b) in BERNOULLI.iter().enumerate() {
        let n = 2.0 * (i + 1) as f64;
        let term = b / (n * (n - 1.0)) * power;
        series += term;
        if term.abs() < budget.target_abs_error * 1e-3 {
            break;
        }
        power *= inv2;
    }
    Ok((x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series - shift)
}

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    ln_gamma(x).map(f64::exp)
}

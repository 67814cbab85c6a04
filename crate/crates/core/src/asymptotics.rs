//! Closed-form limits in many settings (`N → ∞`) and many outcomes
//! (`d → ∞`).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{ln_gamma, trigamma};

fn require_settings(n: usize, min: usize) -> Result<f64> {
    if n < min {
        return Err(Error::InvalidArgument(format!(
            "N must be ≥ {min} (got {n})"
        )));
    }
    Ok(n as f64)
}

/// `lim_{N→∞}` of the maximally entangled Bell value: `1/d`, the
/// no-signaling bound.
pub fn maxent_limit_large_n(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::TooFewOutcomes(d));
    }
    Ok(1.0 / d as f64)
}

/// `lim_{d→∞}` of the maximally entangled Bell value:
/// `(2N/π²) · ψ₁(1 − 1/(2N)) · sin²(π/(2N))`.
///
/// For `N = 2` this is `2 − 16G/π²` with `G` Catalan's constant.
pub fn maxent_limit_large_d(n: usize) -> Result<f64> {
    let nf = require_settings(n, 2)?;
    let half = 1.0 / (2.0 * nf);
    Ok(2.0 * nf / (PI * PI) * trigamma(1.0 - half)? * (PI * half).sin().powi(2))
}

/// `C_N = 2^{4/N−1} √π Γ(1−2/N) / Γ(3/2−2/N)`, the leading coefficient of
/// the approximate state's normalization. Finite only for `N ≥ 3`.
pub fn c_n(n: usize) -> Result<f64> {
    let nf = require_settings(n, 3)?;
    let a = 2.0 / nf;
    let log = (2.0 * a - 1.0) * std::f64::consts::LN_2 + 0.5 * PI.ln() + ln_gamma(1.0 - a)?
        - ln_gamma(1.5 - a)?;
    Ok(log.exp())
}

/// `lim_{d→∞}` entropy of the approximate state: `1/2` for `N = 2`, `1`
/// otherwise.
pub fn approx_entropy_limit(n: usize) -> Result<f64> {
    require_settings(n, 2)?;
    Ok(if n == 2 { 0.5 } else { 1.0 })
}

/// `lim_{d→∞} KL(ψ_max ‖ Φ_app)`: `ln C_N − 4/N` for `N ≥ 3`, `+∞` for `N = 2`
/// (where the divergence is only `O(ln ln d)`).
pub fn kl_limit(n: usize) -> Result<f64> {
    let nf = require_settings(n, 2)?;
    if n == 2 {
        return Ok(f64::INFINITY);
    }
    Ok(c_n(n)?.ln() - 4.0 / nf)
}

/// All limits for one `N`, plus the large-`N` limit for an optional `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitReport {
    pub n_settings: usize,
    pub maxent_limit_large_d: f64,
    pub approx_entropy_limit: f64,
    pub kl_limit: f64,
    /// Present for `N ≥ 3`.
    pub c_n: Option<f64>,
    /// `(d, 1/d)` when an outcome count was supplied.
    pub maxent_limit_large_n: Option<(usize, f64)>,
}

impl LimitReport {
    pub fn new(n_settings: usize, n_outcomes: Option<usize>) -> Result<Self> {
        Ok(Self {
            n_settings,
            maxent_limit_large_d: maxent_limit_large_d(n_settings)?,
            approx_entropy_limit: approx_entropy_limit(n_settings)?,
            kl_limit: kl_limit(n_settings)?,
            c_n: if n_settings >= 3 {
                Some(c_n(n_settings)?)
            } else {
                None
            },
            maxent_limit_large_n: n_outcomes
                .map(|d| maxent_limit_large_n(d).map(|v| (d, v)))
                .transpose()?,
        })
    }
}

//! Outcome statistics and the Bell expression evaluated from them.
//!
//! This is the second, independent route to the Bell value: instead of the
//! quadratic form `λᵀ M λ`, build the joint distribution `P(a, b | x, y)` of
//! the two measurements and add up the chained order probabilities directly.
//!
//! For a state `Σ_k λ_k |kk⟩` measured in the bases of
//! [`crate::model::phases`],
//!
//! ```text
//! P(a, b | x, y) = (1/d²) Σ_kl λ_k λ_l cos(2π (k−l) z / d),   z = a − b + α_x + β_y.
//! ```

use std::f64::consts::PI;

use crate::classical::DeterministicStrategy;
use crate::error::{Error, Result};
use crate::model::{phases, MeasurementPhases, Scenario, SchmidtVector};
use crate::sum::CompensatedSum;

/// Largest `d` for which a full table is materialized (`N²d²` entries).
pub const MAX_TABLE_OUTCOMES: usize = 512;

fn check_indices(scenario: &Scenario, x: usize, y: usize, a: usize, b: usize) -> Result<()> {
    let n = scenario.n_settings();
    let d = scenario.n_outcomes();
    for (what, value, limit) in [("x", x, n), ("y", y, n), ("a", a, d), ("b", b, d)] {
        if value >= limit {
            return Err(Error::IndexOutOfRange { what, value, limit });
        }
    }
    Ok(())
}

/// `R(Δ) = Σ_k λ_k λ_{k+Δ}`.
fn autocorrelation(lambda: &[f64]) -> Vec<f64> {
    let d = lambda.len();
    (0..d)
        .map(|lag| {
            lambda[..d - lag]
                .iter()
                .zip(&lambda[lag..])
                .map(|(p, q)| p * q)
                .collect::<CompensatedSum>()
                .value()
        })
        .collect()
}

/// The double sum grouped by lag `Δ = k − l`.
fn prob_from_autocorrelation(r: &[f64], z: f64) -> f64 {
    let d = r.len() as f64;
    let mut acc = CompensatedSum::new();
    acc.add(r[0]);
    for (lag, &rl) in r.iter().enumerate().skip(1) {
        acc.add(2.0 * rl * (2.0 * PI * lag as f64 * z / d).cos());
    }
    acc.value() / (d * d)
}

/// `P(a, b | x, y)` for an arbitrary Schmidt state.
pub fn prob_general(
    scenario: &Scenario,
    state: &SchmidtVector,
    x: usize,
    y: usize,
    a: usize,
    b: usize,
) -> Result<f64> {
    if state.dim() != scenario.n_outcomes() {
        return Err(Error::DimensionMismatch {
            expected: scenario.n_outcomes(),
            got: state.dim(),
        });
    }
    check_indices(scenario, x, y, a, b)?;
    let z = a as f64 - b as f64 + phases(scenario).offset(x, y);
    Ok(prob_from_autocorrelation(
        &autocorrelation(state.coefficients()),
        z,
    ))
}

/// `(1/d³) sin²(πz) / sin²(πz/d)` with the removable singularity at
/// `z ∈ dℤ` filled in.
fn maxent_kernel(d: usize, z: f64) -> f64 {
    let df = d as f64;
    if (z - df * (z / df).round()).abs() < 1e-12 {
        return 1.0 / df;
    }
    (PI * z).sin().powi(2) / (PI * z / df).sin().powi(2) / (df * df * df)
}

/// `P(a, b | x, y)` for the maximally entangled state.
pub fn prob_maxent(scenario: &Scenario, x: usize, y: usize, a: usize, b: usize) -> Result<f64> {
    check_indices(scenario, x, y, a, b)?;
    let z = a as f64 - b as f64 + phases(scenario).offset(x, y);
    Ok(maxent_kernel(scenario.n_outcomes(), z))
}

/// Full joint distribution `P(a, b | x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    scenario: Scenario,
    entries: Vec<f64>,
}

impl ProbabilityTable {
    fn allocate(scenario: Scenario) -> Result<Self> {
        let d = scenario.n_outcomes();
        if d > MAX_TABLE_OUTCOMES {
            return Err(Error::TableTooLarge {
                d,
                max: MAX_TABLE_OUTCOMES,
            });
        }
        let n = scenario.n_settings();
        Ok(Self {
            scenario,
            entries: vec![0.0; n * n * d * d],
        })
    }

    #[inline]
    fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        let n = self.scenario.n_settings();
        let d = self.scenario.n_outcomes();
        ((x * n + y) * d + a) * d + b
    }

    /// Build a table from any function of `(x, y, a, b)`. No invariants are
    /// enforced.
    pub fn from_fn(
        scenario: Scenario,
        mut f: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut table = Self::allocate(scenario)?;
        let n = scenario.n_settings();
        let d = scenario.n_outcomes();
        for x in 0..n {
            for y in 0..n {
                for a in 0..d {
                    for b in 0..d {
                        let i = table.index(x, y, a, b);
                        table.entries[i] = f(x, y, a, b);
                    }
                }
            }
        }
        Ok(table)
    }

    /// Quantum statistics of a Schmidt state.
    pub fn from_state(scenario: Scenario, state: &SchmidtVector) -> Result<Self> {
        if state.dim() != scenario.n_outcomes() {
            return Err(Error::DimensionMismatch {
                expected: scenario.n_outcomes(),
                got: state.dim(),
            });
        }
        let r = autocorrelation(state.coefficients());
        let ph = phases(&scenario);
        Self::from_fn(scenario, |x, y, a, b| {
            prob_from_autocorrelation(&r, a as f64 - b as f64 + ph.offset(x, y))
        })
    }

    /// Quantum statistics of the maximally entangled state.
    pub fn maxent(scenario: Scenario) -> Result<Self> {
        let ph: MeasurementPhases = phases(&scenario);
        let d = scenario.n_outcomes();
        Self::from_fn(scenario, |x, y, a, b| {
            maxent_kernel(d, a as f64 - b as f64 + ph.offset(x, y))
        })
    }

    /// Point distribution of a local deterministic strategy.
    pub fn deterministic(scenario: Scenario, strategy: &DeterministicStrategy) -> Result<Self> {
        strategy.check(&scenario)?;
        Self::from_fn(scenario, |x, y, a, b| {
            (strategy.alice_outputs[x] == a && strategy.bob_outputs[y] == b) as u8 as f64
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.entries[self.index(x, y, a, b)]
    }

    /// All entries in `(x, y, a, b)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        let n = self.scenario.n_settings();
        let d = self.scenario.n_outcomes();
        (0..n).flat_map(move |x| {
            (0..n).flat_map(move |y| {
                (0..d).flat_map(move |a| (0..d).map(move |b| (x, y, a, b, self.get(x, y, a, b))))
            })
        })
    }

    /// Exchange the parties and reverse the setting order:
    /// `A'_x = B_{N−1−x}`, `B'_y = A_{N−1−y}`.
    pub fn swap_parties_reverse_settings(&self) -> Self {
        let n = self.scenario.n_settings();
        Self::from_fn(self.scenario, |x, y, a, b| {
            self.get(n - 1 - y, n - 1 - x, b, a)
        })
        .expect("same scenario as an existing table")
    }

    /// `P(A_x ⋈ B_y)` for an order relation on the outcomes.
    fn order_probability(&self, x: usize, y: usize, rel: impl Fn(usize, usize) -> bool) -> f64 {
        let d = self.scenario.n_outcomes();
        let mut acc = CompensatedSum::new();
        for a in 0..d {
            for b in 0..d {
                if rel(a, b) {
                    acc.add(self.get(x, y, a, b));
                }
            }
        }
        acc.value()
    }

    /// `⟨[s·(A_x − B_y) + shift] mod d⟩`, with `s = ±1`.
    fn mod_expectation(&self, x: usize, y: usize, alice_sign: i64, shift: i64) -> f64 {
        let d = self.scenario.n_outcomes();
        let mut acc = CompensatedSum::new();
        for a in 0..d {
            for b in 0..d {
                let diff = alice_sign * (a as i64 - b as i64) + shift;
                let value = diff.rem_euclid(d as i64) as f64;
                acc.add(value * self.get(x, y, a, b));
            }
        }
        acc.value()
    }
}

/// `P(A_{N−1} ≥ B_0) + Σ_n P(A_n < B_n) + Σ_{n<N−1} P(B_{n+1} < A_n)`.
pub fn bell_value_from_probs(table: &ProbabilityTable) -> f64 {
    let n = table.scenario.n_settings();
    let mut acc = CompensatedSum::new();
    acc.add(table.order_probability(n - 1, 0, |a, b| a >= b));
    for i in 0..n {
        acc.add(table.order_probability(i, i, |a, b| a < b));
    }
    for i in 0..n - 1 {
        acc.add(table.order_probability(i, i + 1, |a, b| b < a));
    }
    acc.value()
}

/// The modular chained expression
/// `⟨[B_0−A_0]⟩ + ⟨[A_0−B_1]⟩ + … + ⟨[B_{N−1}−A_{N−1}]⟩ + ⟨[A_{N−1}−B_0−1]⟩`
/// evaluated literally on `table`.
pub fn barrett_expression(table: &ProbabilityTable) -> f64 {
    let n = table.scenario.n_settings();
    let mut acc = CompensatedSum::new();
    for i in 0..n {
        acc.add(table.mod_expectation(i, i, -1, 0));
        if i + 1 < n {
            acc.add(table.mod_expectation(i, i + 1, 1, 0));
        }
    }
    acc.add(table.mod_expectation(n - 1, 0, 1, -1));
    acc.value()
}

/// `I_{N,d}` in the labelling where `I = d·B − 1` holds for every table.
///
/// The modular expression and the order-probability expression describe the
/// same inequality up to exchanging the parties and reversing the settings;
/// this applies that relabelling before evaluating [`barrett_expression`].
pub fn barrett_value(table: &ProbabilityTable) -> f64 {
    barrett_expression(&table.swap_parties_reverse_settings())
}

/// Largest marginal inconsistency of a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoSignalingReport {
    /// `max |Σ_b P(a,b|x,y) − Σ_b P(a,b|x,y′)|`.
    pub alice: f64,
    /// `max |Σ_a P(a,b|x,y) − Σ_a P(a,b|x′,y)|`.
    pub bob: f64,
}

impl NoSignalingReport {
    pub fn max_deviation(&self) -> f64 {
        self.alice.max(self.bob)
    }
}

pub fn nosignaling_check(table: &ProbabilityTable) -> NoSignalingReport {
    let n = table.scenario.n_settings();
    let d = table.scenario.n_outcomes();
    let alice_marginal = |x: usize, y: usize, a: usize| -> f64 {
        (0..d)
            .map(|b| table.get(x, y, a, b))
            .collect::<CompensatedSum>()
            .value()
    };
    let bob_marginal = |x: usize, y: usize, b: usize| -> f64 {
        (0..d)
            .map(|a| table.get(x, y, a, b))
            .collect::<CompensatedSum>()
            .value()
    };

    let mut alice = 0.0f64;
    let mut bob = 0.0f64;
    for x in 0..n {
        for o in 0..d {
            let reference_a = alice_marginal(x, 0, o);
            let reference_b = bob_marginal(0, x, o);
            for other in 1..n {
                alice = alice.max((alice_marginal(x, other, o) - reference_a).abs());
                bob = bob.max((bob_marginal(other, x, o) - reference_b).abs());
            }
        }
    }
    NoSignalingReport { alice, bob }
}

/// Minimum of the Bell expression over no-signaling correlations, `1/d`.
pub fn nosignaling_bound(scenario: &Scenario) -> f64 {
    1.0 / scenario.n_outcomes() as f64
}

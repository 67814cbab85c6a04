//! Exhaustive search over local deterministic strategies.
//!
//! Every local model is a mixture of deterministic assignments, so the
//! minimum of the Bell expression over the `d^N × d^N` assignments is the
//! classical bound.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Scenario;

/// Default limit on the number of strategy pairs enumerated.
pub const DEFAULT_CAP: u64 = 100_000_000;

/// One output per setting for each party.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    pub alice_outputs: Vec<usize>,
    pub bob_outputs: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(alice_outputs: Vec<usize>, bob_outputs: Vec<usize>) -> Self {
        Self {
            alice_outputs,
            bob_outputs,
        }
    }

    pub(crate) fn check(&self, scenario: &Scenario) -> Result<()> {
        let n = scenario.n_settings();
        let d = scenario.n_outcomes();
        for (what, outputs) in [
            ("alice_outputs", &self.alice_outputs),
            ("bob_outputs", &self.bob_outputs),
        ] {
            if outputs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: outputs.len(),
                });
            }
            if let Some(&value) = outputs.iter().find(|&&o| o >= d) {
                return Err(Error::IndexOutOfRange {
                    what,
                    value,
                    limit: d,
                });
            }
        }
        Ok(())
    }
}

/// Number of Bell-expression events that fire; always an integer.
fn count_events(alice: &[usize], bob: &[usize]) -> u32 {
    let n = alice.len();
    let mut count = (alice[n - 1] >= bob[0]) as u32;
    for i in 0..n {
        count += (alice[i] < bob[i]) as u32;
    }
    for i in 0..n - 1 {
        count += (bob[i + 1] < alice[i]) as u32;
    }
    count
}

/// Bell expression of a deterministic strategy.
pub fn strategy_value(scenario: &Scenario, strategy: &DeterministicStrategy) -> Result<f64> {
    strategy.check(scenario)?;
    Ok(count_events(&strategy.alice_outputs, &strategy.bob_outputs) as f64)
}

/// Decode `index` as `n` base-`d` digits, least significant first.
fn decode(mut index: u64, d: u64, out: &mut [usize]) {
    for o in out.iter_mut() {
        *o = (index % d) as usize;
        index /= d;
    }
}

/// Increment an odometer. Returns false after wrapping around.
fn advance(digits: &mut [usize], d: usize) -> bool {
    for digit in digits.iter_mut() {
        *digit += 1;
        if *digit < d {
            return true;
        }
        *digit = 0;
    }
    false
}

/// Exact minimum of the Bell expression over deterministic strategies.
///
/// Alice's assignments are split across worker threads. Ties are broken by
/// the smallest (Alice index, Bob index) so the returned minimizer does not
/// depend on scheduling.
pub fn classical_min_bruteforce(
    scenario: &Scenario,
    cap: u64,
) -> Result<(f64, DeterministicStrategy)> {
    let n = scenario.n_settings();
    let d = scenario.n_outcomes();
    let per_party = (d as u128).checked_pow(n as u32);
    let pairs = per_party.and_then(|p| p.checked_mul(p));
    let count = match pairs {
        Some(c) if c <= cap as u128 => c,
        other => {
            return Err(Error::InstanceTooLarge {
                count: other.unwrap_or(u128::MAX),
                cap,
            })
        }
    };
    let per_party = per_party.expect("checked above") as u64;
    debug_assert_eq!(per_party as u128 * per_party as u128, count);

    let (value, alice_index, bob_index) = (0..per_party)
        .into_par_iter()
        .map(|ai| {
            let mut alice = vec![0; n];
            decode(ai, d as u64, &mut alice);
            let mut bob = vec![0; n];
            let mut best = (u32::MAX, ai, 0u64);
            let mut bi = 0u64;
            loop {
                let v = count_events(&alice, &bob);
                if v < best.0 {
                    best = (v, ai, bi);
                }
                bi += 1;
                if !advance(&mut bob, d) {
                    break;
                }
            }
            best
        })
        .min()
        .expect("at least one strategy");

    let mut alice = vec![0; n];
    let mut bob = vec![0; n];
    decode(alice_index, d as u64, &mut alice);
    decode(bob_index, d as u64, &mut bob);
    Ok((value as f64, DeterministicStrategy::new(alice, bob)))
}

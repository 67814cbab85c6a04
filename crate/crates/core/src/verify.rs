//! Built-in self-check: cross-validates the independent code paths against
//! each other and against known closed forms.

use std::f64::consts::PI;
use std::fmt;

use crate::asymptotics::{kl_limit, maxent_limit_large_d};
use crate::classical::classical_min_bruteforce;
use crate::eigen::{dense_min_eig_oracle, optimal_violation, SolverConfig};
use crate::entropy::{approx_state, entropy, kl_vs_maxent};
use crate::matrix::{matvec, maxent_value_closed_form, BellMatrix, MatvecEngine, MatvecMode};
use crate::model::{maxent_state, validate_schmidt, Scenario, SchmidtVector, Validation};
use crate::probabilities::{
    barrett_value, bell_value_from_probs, nosignaling_check, prob_general, prob_maxent,
    ProbabilityTable,
};
use crate::special::{trigamma, CATALAN};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }

    /// Pass iff `|got − want| ≤ tol`.
    fn close(name: &str, got: f64, want: f64, tol: f64) -> Self {
        let err = (got - want).abs();
        Self::new(
            name,
            err <= tol,
            format!("got {got:.12e}, want {want:.12e}, |err| = {err:.2e} (tol {tol:.0e})"),
        )
    }

    fn from_result(name: &str, r: crate::Result<Check>) -> Self {
        r.unwrap_or_else(|e| Self::new(name, false, format!("error: {e}")))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{} checks, {} passed, {failed} failed",
            self.checks.len(),
            self.checks.len() - failed
        )
    }
}

/// Off-diagonal symbol entries must be strictly negative.
pub fn check_symbol_sign(matrix: &BellMatrix) -> Check {
    let bad = matrix.nonnegative_off_diagonals();
    let name = format!("symbol sign {}", matrix.scenario());
    if bad.is_empty() {
        Check::new(&name, true, "all off-diagonal entries < 0")
    } else {
        Check::new(
            &name,
            false,
            format!("non-negative at lags {:?}", &bad[..bad.len().min(8)]),
        )
    }
}

fn scenario(n: usize, d: usize) -> Scenario {
    Scenario::new(n, d).expect("n ≥ 2, d ≥ 1")
}

/// Smooth positive test states, reproducible without an RNG.
fn probe_state(d: usize, seed: usize) -> SchmidtVector {
    let raw = (0..d)
        .map(|k| 1.05 + (1.7 * k as f64 + 0.37 * seed as f64).sin())
        .collect();
    validate_schmidt(
        raw,
        Validation {
            renormalize: true,
            strict_sign: true,
        },
    )
    .expect("positive raw vector")
}

fn symbol_checks(out: &mut Vec<Check>) {
    let mut worst = None;
    for n in 2..=8 {
        for d in 2..=128 {
            let c = check_symbol_sign(&BellMatrix::new(scenario(n, d)));
            if !c.passed && worst.is_none() {
                worst = Some(c);
            }
        }
    }
    out.push(worst.unwrap_or_else(|| Check::new("symbol sign", true, "N in 2..=8, d in 2..=128")));

    let (n, d) = (5.0, 7.0);
    let m = BellMatrix::new(scenario(5, 7));
    out.push(Check::close(
        "diagonal N − (N−1)/d",
        m.symbol()[0],
        n - (n - 1.0) / d,
        1e-14,
    ));
}

fn eigen_checks(out: &mut Vec<Check>) {
    let cfg = SolverConfig::default();
    out.push(Check::from_result(
        "eigenvalue (2,2)",
        (|| {
            let r = optimal_violation(scenario(2, 2), &cfg)?;
            Ok(Check::close(
                "eigenvalue (2,2) = (3−√2)/2",
                r.min_eigenvalue,
                (3.0 - 2f64.sqrt()) / 2.0,
                1e-9,
            ))
        })(),
    ));

    out.push(Check::from_result(
        "eigenvalue (2,3)",
        (|| {
            let r = optimal_violation(scenario(2, 3), &cfg)?;
            Ok(Check::close(
                "eigenvalue (2,3)",
                r.min_eigenvalue,
                0.695_048_594_829_108_4,
                1e-9,
            ))
        })(),
    ));

    let mut max_err = 0.0f64;
    let mut max_pal = 0.0f64;
    let mut failure = None;
    for n in [2, 3, 5] {
        for d in [2, 3, 4, 7, 12, 25, 40] {
            let m = BellMatrix::new(scenario(n, d));
            match (
                optimal_violation(scenario(n, d), &cfg),
                dense_min_eig_oracle(&m),
            ) {
                (Ok(r), Ok((dense, _))) => {
                    max_err = max_err.max((r.min_eigenvalue - dense).abs());
                    max_pal = max_pal.max(r.optimal_state.palindrome_deviation());
                    if r.optimal_state.coefficients().iter().any(|&c| c <= 0.0) {
                        failure.get_or_insert(format!("non-positive state at N={n}, d={d}"));
                    }
                }
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(format!("N={n}, d={d}: {e}"));
                }
            }
        }
    }
    out.push(match failure {
        Some(f) => Check::new("power iteration vs dense Jacobi", false, f),
        None => Check::new(
            "power iteration vs dense Jacobi",
            max_err < 1e-9,
            format!("max |Δλ| = {max_err:.2e}"),
        ),
    });
    out.push(Check::new(
        "optimal states palindromic",
        max_pal < 1e-8,
        format!("max deviation {max_pal:.2e}"),
    ));
}

fn matvec_checks(out: &mut Vec<Check>) {
    let mut worst = 0.0f64;
    for (n, d) in [(2, 2), (3, 3), (2, 17), (7, 129), (4, 512), (3, 3000)] {
        let m = BellMatrix::new(scenario(n, d));
        let v = probe_state(d, n).into_coefficients();
        let mut naive = MatvecEngine::new(&m, MatvecMode::Naive).deterministic(true);
        let mut fast = MatvecEngine::new(&m, MatvecMode::Fast);
        let a = matvec(&m, &mut naive, &v).expect("dims match");
        let b = matvec(&m, &mut fast, &v).expect("dims match");
        let scale = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let err = a
            .iter()
            .zip(&b)
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
        worst = worst.max(err / scale);
    }
    out.push(Check::new(
        "naive vs FFT matvec",
        worst < 1e-10,
        format!("max relative difference {worst:.2e}"),
    ));
}

fn maxent_checks(out: &mut Vec<Check>) {
    let mut worst = 0.0f64;
    for n in 2..=10 {
        for d in 1..=200 {
            let s = scenario(n, d);
            let diag = BellMatrix::new(s).maxent_value();
            worst = worst.max((diag - maxent_value_closed_form(&s)).abs());
        }
    }
    out.push(Check::new(
        "maximally entangled value: symbol sum vs closed form",
        worst < 1e-12,
        format!("max |Δ| = {worst:.2e}"),
    ));
}

fn probability_checks(out: &mut Vec<Check>) {
    let mut path_err = 0.0f64;
    let mut ns_err = 0.0f64;
    let mut affine_err = 0.0f64;
    let mut norm_err = 0.0f64;
    let mut failure = None;
    for (n, d) in [(2, 2), (2, 3), (3, 4), (4, 5)] {
        let s = scenario(n, d);
        for seed in 0..3 {
            let state = probe_state(d, seed);
            let m = BellMatrix::new(s);
            let table = match ProbabilityTable::from_state(s, &state) {
                Ok(t) => t,
                Err(e) => {
                    failure.get_or_insert(format!("{s}: {e}"));
                    continue;
                }
            };
            let q = m.quadratic_form(state.coefficients()).expect("dims match");
            path_err = path_err.max((bell_value_from_probs(&table) - q).abs());
            ns_err = ns_err.max(nosignaling_check(&table).max_deviation());
            let barrett = barrett_value(&table);
            affine_err = affine_err.max((barrett - (d as f64 * q - 1.0)).abs());
            for x in 0..n {
                for y in 0..n {
                    let total: f64 = (0..d)
                        .flat_map(|a| (0..d).map(move |b| (a, b)))
                        .map(|(a, b)| table.get(x, y, a, b))
                        .sum();
                    norm_err = norm_err.max((total - 1.0).abs());
                }
            }
        }
        let maxent = maxent_state(d).expect("d ≥ 1");
        for x in 0..n {
            for a in 0..d {
                let g = prob_general(&s, &maxent, x, x, a, 0).expect("in range");
                let k = prob_maxent(&s, x, x, a, 0).expect("in range");
                path_err = path_err.max((g - k).abs());
            }
        }
    }
    if let Some(f) = failure {
        out.push(Check::new("probability tables", false, f));
        return;
    }
    out.push(Check::new(
        "Bell value: probabilities vs quadratic form",
        path_err < 1e-12,
        format!("max |Δ| = {path_err:.2e}"),
    ));
    out.push(Check::new(
        "normalization",
        norm_err < 1e-12,
        format!("max |Σp − 1| = {norm_err:.2e}"),
    ));
    out.push(Check::new(
        "no-signaling",
        ns_err < 1e-12,
        format!("max marginal deviation {ns_err:.2e}"),
    ));
    out.push(Check::new(
        "I = d·B − 1",
        affine_err < 1e-12,
        format!("max |Δ| = {affine_err:.2e}"),
    ));
}

fn classical_checks(out: &mut Vec<Check>) {
    let mut failure = None;
    let mut count = 0;
    for (n, d) in [(2, 2), (2, 3), (3, 2), (3, 3), (2, 4)] {
        match classical_min_bruteforce(&scenario(n, d), 10_000_000) {
            Ok((1.0, _)) => count += 1,
            Ok((v, _)) => {
                failure.get_or_insert(format!("N={n}, d={d}: minimum {v}, expected 1"));
            }
            Err(e) => {
                failure.get_or_insert(format!("N={n}, d={d}: {e}"));
            }
        }
    }
    out.push(match failure {
        Some(f) => Check::new("classical minimum = 1", false, f),
        None => Check::new("classical minimum = 1", true, format!("{count} instances")),
    });
}

fn special_checks(out: &mut Vec<Check>) {
    out.push(Check::from_result(
        "trigamma",
        (|| {
            let a = trigamma(1.0)? - PI * PI / 6.0;
            let b = trigamma(0.75)? - (PI * PI - 8.0 * CATALAN);
            let c = trigamma(0.3)? + trigamma(0.7)? - PI * PI / (0.3 * PI).sin().powi(2);
            let err = a.abs().max(b.abs()).max(c.abs());
            Ok(Check::new(
                "trigamma identities",
                err < 1e-11,
                format!("max |Δ| = {err:.2e}"),
            ))
        })(),
    ));
}

fn limit_checks(out: &mut Vec<Check>) {
    out.push(Check::close(
        "large-N bridge (N=10⁴, d=5)",
        maxent_value_closed_form(&scenario(10_000, 5)),
        0.2,
        1e-3,
    ));
    out.push(Check::from_result(
        "large-d bridge",
        (|| {
            let lim = maxent_limit_large_d(2)?;
            let v = maxent_value_closed_form(&scenario(2, 100_000));
            Ok(Check::close("large-d bridge (N=2, d=10⁵)", v, lim, 1e-5))
        })(),
    ));
    out.push(Check::from_result(
        "KL bridge",
        (|| {
            let lim = kl_limit(4)?;
            let v = kl_vs_maxent(&approx_state(scenario(4, 100_000)).vector);
            Ok(Check::close("KL bridge (N=4, d=10⁵)", v, lim, 1e-2))
        })(),
    ));
}

fn entropy_checks(out: &mut Vec<Check>) {
    out.push(Check::from_result(
        "entropy",
        (|| {
            let e = entropy(&maxent_state(64)?)?;
            Ok(Check::close(
                "entropy of maximally entangled state",
                e,
                1.0,
                1e-14,
            ))
        })(),
    ));
}

/// Run every check. Cheap enough for a smoke test (a few seconds).
pub fn run_verify() -> VerifyReport {
    let mut checks = Vec::new();
    symbol_checks(&mut checks);
    eigen_checks(&mut checks);
    matvec_checks(&mut checks);
    maxent_checks(&mut checks);
    probability_checks(&mut checks);
    classical_checks(&mut checks);
    special_checks(&mut checks);
    limit_checks(&mut checks);
    entropy_checks(&mut checks);
    VerifyReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let report = run_verify();
        assert!(report.all_passed(), "{report}");
        assert!(report.checks.len() >= 15);
    }

    #[test]
    fn sign_check_catches_a_corrupted_symbol() {
        let s = scenario(3, 6);
        let mut symbol = BellMatrix::new(s).symbol().to_vec();
        symbol[4] = 0.25;
        let bad = BellMatrix::from_symbol_unchecked(s, symbol).unwrap();
        let c = check_symbol_sign(&bad);
        assert!(!c.passed);
        assert!(c.detail.contains("[4]"), "{}", c.detail);
        assert!(check_symbol_sign(&BellMatrix::new(s)).passed);
    }

    #[test]
    fn report_formatting() {
        let r = VerifyReport {
            checks: vec![
                Check::close("a", 1.0, 1.0, 1e-12),
                Check::close("b", 1.0, 2.0, 1e-12),
            ],
        };
        assert!(!r.all_passed());
        let text = r.to_string();
        assert!(text.contains("[PASS] a"));
        assert!(text.contains("[FAIL] b"));
        assert!(text.ends_with("2 checks, 1 passed, 1 failed"));
    }
}

//! Smallest eigenpair of the Bell matrix.
//!
//! The optimal quantum value is the smallest eigenvalue `m` of `M` and the
//! most non-classical state is its eigenvector. Write `M = N·I − M′`. The
//! shifted matrix `M′` is entrywise positive (diagonal `(N−1)/d`,
//! off-diagonals `−t_m > 0`), so by Perron–Frobenius its spectral radius is a
//! simple eigenvalue `m′ = N − m` with a strictly positive eigenvector, and
//! power iteration on `M′` from the uniform vector converges to it.
//!
//! [`dense_min_eig_oracle`] is an unrelated cyclic-Jacobi diagonalization of
//! the dense matrix, kept as a cross-check for small `d`.

use crate::error::{Error, Result};
use crate::matrix::{BellMatrix, MatvecEngine, MatvecMode};
use crate::model::{validate_schmidt, Scenario, SchmidtVector, Validation};
use crate::sum;

/// Fixed iteration count of the paper-faithful mode.
pub const PAPER_ITERATIONS: usize = 20;

/// Largest `d` accepted by [`dense_min_eig_oracle`].
pub const DENSE_MAX_DIM: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop once `‖M′v − ρv‖ ≤ residual_tolerance · ρ`.
    pub residual_tolerance: f64,
    /// Run exactly [`PAPER_ITERATIONS`] steps with no convergence test.
    pub paper_faithful: bool,
    pub matvec_mode: MatvecMode,
    pub deterministic: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            residual_tolerance: 1e-10,
            paper_faithful: false,
            matvec_mode: MatvecMode::Fast,
            deterministic: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidArgument("max_iterations must be ≥ 1".into()));
        }
        if !(self.residual_tolerance > 0.0) {
            return Err(Error::InvalidArgument(
                "residual_tolerance must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a smallest-eigenvalue solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationResult {
    /// Smallest eigenvalue of `M`, `N − ρ`.
    pub min_eigenvalue: f64,
    /// `vᵀ M v` for the returned state.
    pub bell_value: f64,
    pub optimal_state: SchmidtVector,
    pub iterations_used: usize,
    /// `‖M′v − ρv‖₂` at the returned vector.
    pub residual: f64,
    pub converged: bool,
}

/// Flip to a positive entry sum and flush denormal-scale magnitudes.
fn orient(v: &mut [f64]) {
    if sum::sum(v.iter().copied()) < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    for x in v.iter_mut() {
        if x.abs() < 1e-300 {
            *x = 0.0;
        }
    }
}

fn to_state(mut v: Vec<f64>) -> Result<SchmidtVector> {
    orient(&mut v);
    validate_schmidt(
        v,
        Validation {
            renormalize: true,
            strict_sign: true,
        },
    )
}

/// Power iteration on `M′ = N·I − M` starting from the maximally entangled
/// state.
///
/// Only the current iterate and one product buffer are kept. The Rayleigh
/// quotient and residual come from the same product that produces the next
/// iterate.
pub fn power_iteration(matrix: &BellMatrix, config: &SolverConfig) -> Result<ViolationResult> {
    config.validate()?;
    let n = matrix.scenario().n_settings() as f64;
    let d = matrix.dim();
    let mut engine =
        MatvecEngine::new(matrix, config.matvec_mode).deterministic(config.deterministic);

    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut mv = vec![0.0; d];
    let mut w = vec![0.0; d];
    let mut steps = 0;
    loop {
        engine.apply_into(&v, &mut mv);
        for ((wi, &vi), &mi) in w.iter_mut().zip(&v).zip(&mv) {
            *wi = n * vi - mi;
        }
        let rho = sum::dot(&v, &w);
        let residual = sum::norm(
            &w.iter()
                .zip(&v)
                .map(|(wi, vi)| wi - rho * vi)
                .collect::<Vec<_>>(),
        );

        let converged = residual <= config.residual_tolerance * rho;
        let stop = if config.paper_faithful {
            steps == PAPER_ITERATIONS
        } else {
            converged || steps == config.max_iterations
        };
        if stop {
            let result = ViolationResult {
                min_eigenvalue: n - rho,
                bell_value: sum::dot(&v, &mv),
                optimal_state: to_state(v)?,
                iterations_used: steps,
                residual,
                converged,
            };
            if config.paper_faithful || converged {
                return Ok(result);
            }
            return Err(Error::NotConverged {
                partial: Box::new(result),
            });
        }

        let norm = sum::norm(&w);
        for (vi, &wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        steps += 1;
    }
}

/// Build the matrix for `scenario` and run [`power_iteration`].
pub fn optimal_violation(scenario: Scenario, config: &SolverConfig) -> Result<ViolationResult> {
    power_iteration(&BellMatrix::new(scenario), config)
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a dense symmetric `d × d` row-major matrix by
/// cyclic Jacobi rotations. Returns eigenvalues and the eigenvector matrix
/// (row-major, eigenvectors in columns).
pub(crate) fn jacobi_eigen(mut a: Vec<f64>, d: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), d * d);
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let frobenius = a.iter().map(|x| x * x).sum::<f64>().sqrt();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                off += a[p * d + q] * a[p * d + q];
            }
        }
        if off.sqrt() <= 1e-15 * frobenius {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..d).map(|i| a[i * d + i]).collect(), v)
}

/// Smallest eigenpair of the dense matrix by cyclic Jacobi. Test oracle,
/// `O(d³)`, limited to `d ≤ 2000`.
pub fn dense_min_eig_oracle(matrix: &BellMatrix) -> Result<(f64, SchmidtVector)> {
    let d = matrix.dim();
    if d > DENSE_MAX_DIM {
        return Err(Error::DenseTooLarge {
            d,
            max: DENSE_MAX_DIM,
        });
    }
    let (values, vectors) = jacobi_eigen(matrix.to_dense(), d);
    let (idx, &min) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("d ≥ 1");
    let column: Vec<f64> = (0..d).map(|k| vectors[k * d + idx]).collect();
    Ok((min, to_state(column)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::bell_value;
    use crate::model::maxent_state;

    fn matrix(n: usize, d: usize) -> BellMatrix {
        BellMatrix::new(Scenario::new(n, d).unwrap())
    }

    // Analytic: eigenvalues of [[1.5, −1/√2], [−1/√2, 1.5]] are 1.5 ∓ 1/√2.
    const B22: f64 = 0.792_893_218_813_452_5;
    // From a numpy/LAPACK dense eigendecomposition of the 3×3 matrix.
    const B23: f64 = 0.695_048_594_829_108_4;

    #[test]
    fn two_by_two() {
        for mode in [MatvecMode::Naive, MatvecMode::Fast] {
            let cfg = SolverConfig {
                matvec_mode: mode,
                ..Default::default()
            };
            let r = power_iteration(&matrix(2, 2), &cfg).unwrap();
            assert!((r.min_eigenvalue - (3.0 - 2f64.sqrt()) / 2.0).abs() < 1e-12);
            for &c in r.optimal_state.coefficients() {
                assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn three_outcomes() {
        let r = power_iteration(&matrix(2, 3), &SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.min_eigenvalue - B23).abs() < 1e-12);
        assert!((r.bell_value - B23).abs() < 1e-12);
        let c = r.optimal_state.coefficients();
        assert!((c[0] - 0.61689403).abs() < 1e-8);
        assert!((c[1] - 0.48875711).abs() < 1e-8);
        let ratio = (11f64.sqrt() - 3f64.sqrt()) / 2.0;
        assert!((c[1] / c[0] - ratio).abs() < 1e-10);
    }

    #[test]
    fn single_outcome() {
        for n in [2, 5] {
            let r = power_iteration(&matrix(n, 1), &SolverConfig::default()).unwrap();
            assert_eq!(r.min_eigenvalue, 1.0);
            assert_eq!(r.optimal_state.coefficients(), &[1.0]);
            let (e, s) = dense_min_eig_oracle(&matrix(n, 1)).unwrap();
            assert_eq!(e, 1.0);
            assert_eq!(s.coefficients(), &[1.0]);
        }
    }

    #[test]
    fn dense_oracle_small() {
        let (e, _) = dense_min_eig_oracle(&matrix(2, 2)).unwrap();
        assert!((e - B22).abs() < 1e-14);
        let (e, s) = dense_min_eig_oracle(&matrix(2, 3)).unwrap();
        assert!((e - B23).abs() < 1e-14);
        assert!(s.coefficients().iter().all(|&c| c > 0.0));
    }

    #[test]
    fn jacobi_diagonalizes() {
        let m = matrix(3, 12);
        let (vals, vecs) = jacobi_eigen(m.to_dense(), 12);
        let dense = m.to_dense();
        for j in 0..12 {
            for i in 0..12 {
                let av: f64 = (0..12).map(|k| dense[i * 12 + k] * vecs[k * 12 + j]).sum();
                assert!((av - vals[j] * vecs[i * 12 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_size_limit() {
        assert!(matches!(
            dense_min_eig_oracle(&matrix(2, 2001)),
            Err(Error::DenseTooLarge { d: 2001, .. })
        ));
    }

    #[test]
    fn agrees_with_dense_oracle() {
        for n in [2, 3, 5] {
            for d in (2..=40).step_by(3) {
                let m = matrix(n, d);
                let r = power_iteration(&m, &SolverConfig::default()).unwrap();
                let (e, s) = dense_min_eig_oracle(&m).unwrap();
                assert!((r.min_eigenvalue - e).abs() < 1e-10, "N={n} d={d}");
                let diff: f64 = r
                    .optimal_state
                    .coefficients()
                    .iter()
                    .zip(s.coefficients())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-6, "N={n} d={d} eigvec diff {diff}");
            }
        }
    }

    #[test]
    fn structure_of_solution() {
        for n in [2, 3, 7] {
            for d in [2, 5, 16, 101, 1000] {
                let m = matrix(n, d);
                let r = power_iteration(&m, &SolverConfig::default()).unwrap();
                let c = r.optimal_state.coefficients();
                assert!(c.iter().all(|&x| x > 0.0));
                assert!(r.optimal_state.palindrome_deviation() < 1e-8);
                let maxent = bell_value(&m, &maxent_state(d).unwrap()).unwrap();
                assert!(r.min_eigenvalue <= maxent + 1e-12);
                assert!(r.min_eigenvalue < 1.0);
                assert!(r.min_eigenvalue >= 0.0);
                assert!(r.residual <= 1e-10 * (n as f64 - r.min_eigenvalue));
            }
        }
    }

    #[test]
    fn paper_faithful_runs_twenty_steps() {
        let cfg = SolverConfig {
            paper_faithful: true,
            ..Default::default()
        };
        let r = power_iteration(&matrix(3, 50), &cfg).unwrap();
        assert_eq!(r.iterations_used, PAPER_ITERATIONS);
        let exact = power_iteration(&matrix(3, 50), &SolverConfig::default()).unwrap();
        assert!((r.min_eigenvalue - exact.min_eigenvalue).abs() < 1e-6);
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = SolverConfig {
            max_iterations: 2,
            residual_tolerance: 1e-15,
            ..Default::default()
        };
        match power_iteration(&matrix(2, 300), &cfg) {
            Err(Error::NotConverged { partial }) => {
                assert_eq!(partial.iterations_used, 2);
                assert!(!partial.converged);
                assert!(partial.residual > 0.0);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(power_iteration(&matrix(2, 2), &bad).is_err());
        let bad = SolverConfig {
            residual_tolerance: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn deterministic_runs_are_bit_identical() {
        let cfg = SolverConfig {
            deterministic: true,
            ..Default::default()
        };
        let a = power_iteration(&matrix(3, 3000), &cfg).unwrap();
        let b = power_iteration(&matrix(3, 3000), &cfg).unwrap();
        assert_eq!(a, b);
    }
}

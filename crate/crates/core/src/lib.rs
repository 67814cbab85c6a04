//! Chained Bell inequalities with `N` settings and `d` outcomes per party.
//!
//! The Bell expression for a pure state with Schmidt coefficients `λ` is the
//! quadratic form `λᵀ M λ` of a symmetric Toeplitz matrix `M`
//! ([`BellMatrix`]). Local strategies cannot go below `1` and
//! no-signaling ones reach `1/d`. The most non-classical quantum state is the eigenvector of the smallest eigenvalue of `M`
//! ([`optimal_violation`]).
//!
//! ```
//! use chained_bell::{optimal_violation, Scenario, SolverConfig};
//!
//! let scenario = Scenario::new(2, 2)?;
//! let result = optimal_violation(scenario, &SolverConfig::default())?;
//! assert!((result.min_eigenvalue - (3.0 - 2f64.sqrt()) / 2.0).abs() < 1e-12);
//! # Ok::<(), chained_bell::Error>(())
//! ```

// `!(x > 0.0)` style checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod classical;
pub mod eigen;
pub mod entropy;
mod error;
pub mod matrix;
pub mod model;
pub mod probabilities;
pub mod special;
pub mod sum;
pub mod sweep;
pub mod verify;

pub use asymptotics::{
    approx_entropy_limit, c_n, kl_limit, maxent_limit_large_d, maxent_limit_large_n, LimitReport,
};
pub use classical::{classical_min_bruteforce, strategy_value, DeterministicStrategy};
pub use eigen::{
    dense_min_eig_oracle, optimal_violation, power_iteration, SolverConfig, ViolationResult,
};
pub use entropy::{approx_state, entropy, kl_vs_maxent, ApproxState, EntropyReport};
pub use error::{Error, Result};
pub use matrix::{
    bell_value, build_bell_matrix, matvec, maxent_value_closed_form, BellMatrix, MatvecEngine,
    MatvecMode,
};
pub use model::{
    make_scenario, maxent_state, phases, validate_schmidt, MeasurementPhases, Scenario,
    SchmidtVector, Validation,
};
pub use probabilities::{
    barrett_expression, barrett_value, bell_value_from_probs, nosignaling_bound, nosignaling_check,
    prob_general, prob_maxent, NoSignalingReport, ProbabilityTable,
};
pub use sweep::{run_sweep, Grid, Outputs, SweepRow, SweepSpec};
pub use verify::{run_verify, Check, VerifyReport};

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/inequality.md")]
    mod inequality {}
    #[doc = include_str!("../../../book/src/bell-matrix.md")]
    mod bell_matrix {}
    #[doc = include_str!("../../../book/src/probabilities.md")]
    mod probabilities {}
    #[doc = include_str!("../../../book/src/eigensolver.md")]
    mod eigensolver {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

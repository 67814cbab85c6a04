//! The Bell matrix `M` and products with it.
//!
//! For the measurement bases in [`crate::model::phases`] the Bell expression
//! restricted to states `Σ_k λ_k |kk⟩` is the quadratic form `λᵀ M λ` with
//!
//! ```text
//! M_kl = N δ_kl − (N/d) · sin((N−1)π(k−l)/(dN)) / sin(π(k−l)/d)
//! ```
//!
//! `M` depends only on `|k − l|`, so it is a symmetric Toeplitz matrix and is
//! stored as its first row (the *symbol*) `t_0 … t_{d−1}`. The diagonal is
//! taken from the closed form `t_0 = N − (N−1)/d` rather than from the 0/0
//! limit of the ratio.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{Scenario, SchmidtVector};
use crate::sum::{self, CompensatedSum};

/// Symmetric Toeplitz Bell matrix, `M_kl = symbol[|k − l|]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellMatrix {
    scenario: Scenario,
    symbol: Arc<[f64]>,
}

/// Off-diagonal entry `t_m`, `m ≥ 1`.
fn off_diagonal(n: f64, d: f64, m: f64) -> f64 {
    -(n / d) * ((n - 1.0) * PI * m / (d * n)).sin() / (PI * m / d).sin()
}

impl BellMatrix {
    pub fn new(scenario: Scenario) -> Self {
        let n = scenario.n_settings() as f64;
        let d = scenario.n_outcomes();
        let df = d as f64;
        let mut symbol = Vec::with_capacity(d);
        symbol.push(n - (n - 1.0) / df);
        for m in 1..d {
            let t = off_diagonal(n, df, m as f64);
            // Both sine arguments lie in (0, π).
            assert!(
                t < 0.0,
                "off-diagonal t_{m} = {t} is not negative for {scenario}"
            );
            symbol.push(t);
        }
        Self {
            scenario,
            symbol: symbol.into(),
        }
    }

    /// Build a matrix from an arbitrary symbol without checking any of the
    /// Bell-matrix invariants. Intended for diagnostics and fault injection.
    pub fn from_symbol_unchecked(scenario: Scenario, symbol: Vec<f64>) -> Result<Self> {
        if symbol.len() != scenario.n_outcomes() {
            return Err(Error::DimensionMismatch {
                expected: scenario.n_outcomes(),
                got: symbol.len(),
            });
        }
        Ok(Self {
            scenario,
            symbol: symbol.into(),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn dim(&self) -> usize {
        self.symbol.len()
    }

    /// `t_0 … t_{d−1}`.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    #[inline]
    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.symbol[k.abs_diff(l)]
    }

    /// Row-major dense copy. `O(d²)` memory.
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for k in 0..d {
            for l in 0..d {
                out.push(self.entry(k, l));
            }
        }
        out
    }

    /// Indices `m ≥ 1` where `t_m` is not strictly negative.
    pub fn nonnegative_off_diagonals(&self) -> Vec<usize> {
        (1..self.dim())
            .filter(|&m| !(self.symbol[m] < 0.0))
            .collect()
    }

    /// `vᵀ M v` for an arbitrary real vector (signs allowed).
    pub fn quadratic_form(&self, v: &[f64]) -> Result<f64> {
        let mut engine = MatvecEngine::auto(self);
        let mv = matvec(self, &mut engine, v)?;
        Ok(sum::dot(v, &mv))
    }

    /// `(1/d) Σ_kl M_kl`, the Bell value of the maximally entangled state,
    /// summed along the diagonals of the Toeplitz matrix.
    pub fn maxent_value(&self) -> f64 {
        let d = self.dim();
        let mut acc = CompensatedSum::new();
        acc.add(d as f64 * self.symbol[0]);
        for m in 1..d {
            acc.add(2.0 * (d - m) as f64 * self.symbol[m]);
        }
        acc.value() / d as f64
    }
}

/// Free-function form of [`BellMatrix::new`].
pub fn build_bell_matrix(scenario: Scenario) -> BellMatrix {
    BellMatrix::new(scenario)
}

/// Bell value `Σ_kl M_kl λ_k λ_l` of a Schmidt state.
pub fn bell_value(matrix: &BellMatrix, state: &SchmidtVector) -> Result<f64> {
    matrix.quadratic_form(state.coefficients())
}

/// Bell value of the maximally entangled state from the expanded
/// single-sum closed form. Independent of the symbol; `O(d)`.
pub fn maxent_value_closed_form(scenario: &Scenario) -> f64 {
    let n = scenario.n_settings() as f64;
    let d = scenario.n_outcomes() as f64;
    let h = 1.0 / (2.0 * n);
    let s2 = (PI * h).sin().powi(2);
    let csc2 = |arg: f64| 1.0 / (PI / d * arg).sin().powi(2);

    let mut acc = CompensatedSum::new();
    acc.add(s2 / (d * d) * csc2(1.0 - h));
    for j in 1..scenario.n_outcomes() {
        let jf = j as f64;
        let w = (d - jf) * s2 / (d * d * d);
        acc.add(w * (2.0 * n - 1.0) * csc2(jf - h));
        acc.add(w * csc2(jf + 1.0 - h));
    }
    acc.value()
}

/// Matrix-vector product strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatvecMode {
    /// `O(d²)` direct loop over the symbol.
    Naive,
    /// `O(d log d)` circulant embedding through the FFT.
    #[default]
    Fast,
}

impl fmt::Display for MatvecMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatvecMode::Naive => "naive",
            MatvecMode::Fast => "fast",
        })
    }
}

impl std::str::FromStr for MatvecMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(MatvecMode::Naive),
            "fast" => Ok(MatvecMode::Fast),
            other => Err(Error::InvalidArgument(format!(
                "unknown matvec mode '{other}' (expected naive|fast)"
            ))),
        }
    }
}

/// Below this size the naive loop is used by [`MatvecEngine::auto`].
const AUTO_FAST_THRESHOLD: usize = 128;
/// Naive rows are split across threads above this size unless deterministic.
const PARALLEL_NAIVE_THRESHOLD: usize = 2048;

/// Per-worker workspace for products with one [`BellMatrix`].
///
/// The fast mode holds an FFT plan of length `L = next_pow2(2d)` and the
/// spectrum of the circulant that embeds `M`. Engines are not shared between
/// threads; build one per worker.
pub struct MatvecEngine {
    mode: MatvecMode,
    symbol: Arc<[f64]>,
    deterministic: bool,
    fast: Option<FastPlan>,
}

struct FastPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    spectrum: Vec<Complex<f64>>,
    buffer: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl FastPlan {
    fn new(symbol: &[f64]) -> Self {
        let d = symbol.len();
        let len = (2 * d).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let mut scratch = vec![Complex::default(); scratch_len];

        // First column of the circulant: t_0 … t_{d−1}, zeros, t_{d−1} … t_1.
        let mut spectrum = vec![Complex::default(); len];
        for (m, &t) in symbol.iter().enumerate() {
            spectrum[m].re = t;
            if m > 0 {
                spectrum[len - m].re = t;
            }
        }
        forward.process_with_scratch(&mut spectrum, &mut scratch);
        let scale = 1.0 / len as f64;
        spectrum.iter_mut().for_each(|c| *c *= scale);

        Self {
            len,
            forward,
            inverse,
            spectrum,
            buffer: vec![Complex::default(); len],
            scratch,
        }
    }

    fn apply(&mut self, v: &[f64], out: &mut [f64]) {
        let d = v.len();
        for (b, &x) in self.buffer.iter_mut().zip(v) {
            *b = Complex::new(x, 0.0);
        }
        self.buffer[d..].fill(Complex::default());
        self.forward
            .process_with_scratch(&mut self.buffer, &mut self.scratch);
        for (b, s) in self.buffer.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inverse
            .process_with_scratch(&mut self.buffer, &mut self.scratch);
        for (o, b) in out.iter_mut().zip(&self.buffer) {
            *o = b.re;
        }
    }
}

impl MatvecEngine {
    pub fn new(matrix: &BellMatrix, mode: MatvecMode) -> Self {
        let fast = match mode {
            MatvecMode::Fast => Some(FastPlan::new(&matrix.symbol)),
            MatvecMode::Naive => None,
        };
        Self {
            mode,
            symbol: Arc::clone(&matrix.symbol),
            deterministic: false,
            fast,
        }
    }

    /// Naive for small `d`, fast otherwise.
    pub fn auto(matrix: &BellMatrix) -> Self {
        let mode = if matrix.dim() < AUTO_FAST_THRESHOLD {
            MatvecMode::Naive
        } else {
            MatvecMode::Fast
        };
        Self::new(matrix, mode)
    }

    /// Keep all work on the calling thread.
    pub fn deterministic(mut self, yes: bool) -> Self {
        self.deterministic = yes;
        self
    }

    pub fn mode(&self) -> MatvecMode {
        self.mode
    }

    /// Length of the transform, if this is a fast engine.
    pub fn transform_len(&self) -> Option<usize> {
        self.fast.as_ref().map(|p| p.len)
    }

    fn serves(&self, matrix: &BellMatrix) -> bool {
        Arc::ptr_eq(&self.symbol, &matrix.symbol) || self.symbol[..] == matrix.symbol[..]
    }

    /// `out ← M v`. The caller guarantees `v.len() == out.len() == d`.
    pub(crate) fn apply_into(&mut self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.symbol.len());
        debug_assert_eq!(out.len(), self.symbol.len());
        match self.fast.as_mut() {
            Some(plan) => plan.apply(v, out),
            None => {
                let t = &self.symbol;
                let row = |k: usize| -> f64 {
                    v.iter()
                        .enumerate()
                        .map(|(l, &x)| t[k.abs_diff(l)] * x)
                        .sum()
                };
                if !self.deterministic && v.len() >= PARALLEL_NAIVE_THRESHOLD {
                    out.par_iter_mut()
                        .enumerate()
                        .for_each(|(k, o)| *o = row(k));
                } else {
                    out.iter_mut().enumerate().for_each(|(k, o)| *o = row(k));
                }
            }
        }
    }
}

impl fmt::Debug for MatvecEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatvecEngine")
            .field("mode", &self.mode)
            .field("dim", &self.symbol.len())
            .field("transform_len", &self.transform_len())
            .field("deterministic", &self.deterministic)
            .finish()
    }
}

/// `M v`.
pub fn matvec(matrix: &BellMatrix, engine: &mut MatvecEngine, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != matrix.dim() {
        return Err(Error::DimensionMismatch {
            expected: matrix.dim(),
            got: v.len(),
        });
    }
    if !engine.serves(matrix) {
        return Err(Error::EngineMismatch);
    }
    let mut out = vec![0.0; v.len()];
    engine.apply_into(v, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::maxent_state;
    use proptest::prelude::*;

    fn scenario(n: usize, d: usize) -> Scenario {
        Scenario::new(n, d).unwrap()
    }

    #[test]
    fn symbol_2_2() {
        let m = BellMatrix::new(scenario(2, 2));
        assert_eq!(m.symbol()[0], 1.5);
        assert!((m.symbol()[1] + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn symbol_3_3() {
        let m = BellMatrix::new(scenario(3, 3));
        assert_eq!(m.symbol()[0], 7.0 / 3.0);
        let t1 = -(2.0 * PI / 9.0).sin() / (PI / 3.0).sin();
        let t2 = -(4.0 * PI / 9.0).sin() / (2.0 * PI / 3.0).sin();
        assert!((m.symbol()[1] - t1).abs() < 1e-15);
        assert!((m.symbol()[2] - t2).abs() < 1e-15);
        // Frozen from an independent numpy evaluation.
        assert!((m.symbol()[1] + 0.7422271989685592).abs() < 1e-14);
        assert!((m.symbol()[2] + 1.1371580426032575).abs() < 1e-14);
    }

    #[test]
    fn symbol_d1() {
        for n in [2, 3, 17] {
            assert_eq!(BellMatrix::new(scenario(n, 1)).symbol(), &[1.0]);
        }
    }

    #[test]
    fn off_diagonals_negative() {
        for n in 2..=12 {
            for d in 2..=200 {
                let m = BellMatrix::new(scenario(n, d));
                assert!(m.nonnegative_off_diagonals().is_empty());
            }
        }
    }

    #[test]
    fn matvec_small() {
        let m = BellMatrix::new(scenario(2, 2));
        for mode in [MatvecMode::Naive, MatvecMode::Fast] {
            let mut e = MatvecEngine::new(&m, mode);
            let y = matvec(&m, &mut e, &[1.0, 1.0]).unwrap();
            let expect = 1.5 - std::f64::consts::FRAC_1_SQRT_2;
            assert!((y[0] - expect).abs() < 1e-14 && (y[1] - expect).abs() < 1e-14);
            assert!((y[0] - 0.79289).abs() < 1e-5);
        }
    }

    #[test]
    fn matvec_unit_vectors_give_columns() {
        let m = BellMatrix::new(scenario(3, 9));
        for mode in [MatvecMode::Naive, MatvecMode::Fast] {
            let mut e = MatvecEngine::new(&m, mode);
            for k in 0..9 {
                let mut v = vec![0.0; 9];
                v[k] = 1.0;
                let col = matvec(&m, &mut e, &v).unwrap();
                for (i, c) in col.iter().enumerate() {
                    assert!((c - m.symbol()[i.abs_diff(k)]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn matvec_errors() {
        let m = BellMatrix::new(scenario(2, 4));
        let other = BellMatrix::new(scenario(3, 4));
        let mut e = MatvecEngine::new(&m, MatvecMode::Naive);
        assert!(matches!(
            matvec(&m, &mut e, &[1.0; 3]),
            Err(Error::DimensionMismatch {
                expected: 4,
                got: 3
            })
        ));
        assert!(matches!(
            matvec(&other, &mut e, &[1.0; 4]),
            Err(Error::EngineMismatch)
        ));
        // Equal symbols from distinct allocations are accepted.
        let twin = BellMatrix::new(scenario(2, 4));
        assert!(matvec(&twin, &mut e, &[1.0; 4]).is_ok());
    }

    #[test]
    fn transform_length() {
        let m = BellMatrix::new(scenario(2, 17));
        let e = MatvecEngine::new(&m, MatvecMode::Fast);
        assert_eq!(e.transform_len(), Some(64));
        let m = BellMatrix::new(scenario(2, 512));
        assert_eq!(
            MatvecEngine::new(&m, MatvecMode::Fast).transform_len(),
            Some(1024)
        );
    }

    #[test]
    fn bell_value_examples() {
        let v = bell_value(&BellMatrix::new(scenario(2, 2)), &maxent_state(2).unwrap()).unwrap();
        assert!((v - (3.0 - 2f64.sqrt()) / 2.0).abs() < 1e-15);

        // (3 t_0 + 4 t_1 + 2 t_2) / 3
        let m = BellMatrix::new(scenario(2, 3));
        let t = m.symbol();
        let by_hand = (3.0 * t[0] + 4.0 * t[1] + 2.0 * t[2]) / 3.0;
        let v = bell_value(&m, &maxent_state(3).unwrap()).unwrap();
        assert!((v - by_hand).abs() < 1e-15);
        assert!((v - 0.7090219829425551).abs() < 1e-14);

        let one = bell_value(&BellMatrix::new(scenario(4, 1)), &maxent_state(1).unwrap()).unwrap();
        assert_eq!(one, 1.0);

        let err = bell_value(&m, &maxent_state(4).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn maxent_value_matches_dense_sum_and_closed_form() {
        for n in 2..=6 {
            for d in 1..=40 {
                let s = scenario(n, d);
                let m = BellMatrix::new(s);
                let dense: f64 = m.to_dense().iter().sum::<f64>() / d as f64;
                let quad = bell_value(&m, &maxent_state(d).unwrap()).unwrap();
                assert!((m.maxent_value() - dense).abs() < 1e-12, "{s}");
                assert!((m.maxent_value() - quad).abs() < 1e-12, "{s}");
                assert!(
                    (m.maxent_value() - maxent_value_closed_form(&s)).abs() < 1e-12,
                    "{s}"
                );
            }
        }
    }

    #[test]
    fn maxent_3_2_symbol_sum() {
        let m = BellMatrix::new(scenario(3, 2));
        let t = m.symbol();
        assert!((m.maxent_value() - (2.0 * t[0] + 2.0 * t[1]) / 2.0).abs() < 1e-15);
    }

    fn unit_vector(raw: Vec<f64>) -> Option<Vec<f64>> {
        let n = sum::norm(&raw);
        (n > 1e-6).then(|| raw.iter().map(|x| x / n).collect())
    }

    proptest! {
        #[test]
        fn quadratic_form_is_nonnegative(
            n in 2usize..8,
            raw in prop::collection::vec(-1.0f64..1.0, 1..64),
        ) {
            let d = raw.len();
            if let Some(v) = unit_vector(raw) {
                let m = BellMatrix::new(scenario(n, d));
                prop_assert!(m.quadratic_form(&v).unwrap() >= -1e-10);
            }
        }

        #[test]
        fn persymmetric_products(
            n in 2usize..8,
            raw in prop::collection::vec(-1.0f64..1.0, 1..300),
        ) {
            let m = BellMatrix::new(scenario(n, raw.len()));
            let mut e = MatvecEngine::auto(&m);
            let mut rev = raw.clone();
            rev.reverse();
            let mut a = matvec(&m, &mut e, &rev).unwrap();
            a.reverse();
            let b = matvec(&m, &mut e, &raw).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn naive_and_fast_agree(
            n in 2usize..12,
            raw in prop::collection::vec(-1.0f64..1.0, 1..400),
        ) {
            let m = BellMatrix::new(scenario(n, raw.len()));
            let a = matvec(&m, &mut MatvecEngine::new(&m, MatvecMode::Naive), &raw).unwrap();
            let b = matvec(&m, &mut MatvecEngine::new(&m, MatvecMode::Fast), &raw).unwrap();
            let scale = sum::norm(&a).max(1e-300);
            let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            prop_assert!(sum::norm(&diff) / scale <= 1e-10);
        }
    }
}

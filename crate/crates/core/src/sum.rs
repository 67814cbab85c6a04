//! Compensated summation.
//!
//! Bell values at large `d` sit close to zero while the individual terms of
//! the quadratic form are O(1), so plain left-to-right accumulation loses
//! digits. Everything here uses Neumaier's variant of Kahan summation, which
//! also handles terms larger than the running sum.

use std::iter::FromIterator;

/// Running compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Compensated dot product. Panics if the lengths differ.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Euclidean norm with compensated accumulation of the squares.
pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

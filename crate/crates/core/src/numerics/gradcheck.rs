use alloc::vec::Vec;

use super::DenseVector;
use crate::error::{Error, Result};

/// Central-difference gradient of `f` at `at` with step `h`.
pub fn finite_diff_grad<F>(mut f: F, at: &DenseVector, h: f64) -> Result<DenseVector>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(alloc::format!("step h must be > 0, got {h}")));
    }
    let mut x: Vec<f64> = at.as_slice().to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let plus = f(&x);
        x[i] = orig - h;
        let minus = f(&x);
        x[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite("finite-difference evaluation"));
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    DenseVector::new(grad)
}

/// `|a − b| / max(|a|, |b|, floor)`.
///
/// The floor keeps coordinates whose true gradient is near zero from being
/// judged on round-off alone.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| relative_error(x, y, floor))
        .fold(0.0, f64::max)
}

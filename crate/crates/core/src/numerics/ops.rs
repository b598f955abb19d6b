use alloc::vec::Vec;

use super::DenseVector;
use crate::error::{Error, Result};

/// Lower clamp applied to probabilities before taking the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &DenseVector) -> Result<DenseVector> {
    let mut out: Vec<f64> = logits.as_slice().to_vec();
    softmax_in_place(&mut out)?;
    Ok(DenseVector::new(out).expect("softmax of finite input is finite"))
}

pub fn softmax_in_place(values: &mut [f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyLogits);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logits"));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in values.iter_mut() {
        *v = libm::exp(*v - max);
        total += *v;
    }
    for v in values.iter_mut() {
        *v /= total;
    }
    Ok(())
}

/// `−ln(max(probs[class], PROB_FLOOR))`.
pub fn cross_entropy(probs: &[f64], true_class: usize) -> Result<f64> {
    let p = *probs.get(true_class).ok_or(Error::IndexOutOfRange {
        index: true_class,
        len: probs.len(),
    })?;
    Ok(-libm::log(p.max(PROB_FLOOR)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(data: Vec<f64>) -> DenseVector {
        DenseVector::new(data).unwrap()
    }

    #[test]
    fn softmax_uniform() {
        let p = softmax(&v(vec![0.0; 4])).unwrap();
        for &x in p.as_slice() {
            assert_eq!(x, 0.25);
        }
    }

    #[test]
    fn softmax_of_log_weights() {
        let logits = v((1..=4).map(|k| libm::log(k as f64)).collect());
        let p = softmax(&logits).unwrap();
        for (k, &x) in p.as_slice().iter().enumerate() {
            assert!((x - (k + 1) as f64 / 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_large_logits() {
        let p = softmax(&v(vec![1000.0, 0.0])).unwrap();
        assert!(p[0].is_finite() && p[1].is_finite());
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(p[1] < 1e-300);
    }

    #[test]
    fn softmax_empty() {
        assert_eq!(softmax(&DenseVector::zeros(0)), Err(Error::EmptyLogits));
    }

    #[test]
    fn cross_entropy_values() {
        let ln4 = cross_entropy(&[0.25; 4], 2).unwrap();
        assert!((ln4 - 1.386294).abs() < 1e-6);
        assert_eq!(cross_entropy(&[1.0, 0.0, 0.0, 0.0], 0).unwrap(), 0.0);
        let x = cross_entropy(&[0.1, 0.2, 0.3, 0.4], 3).unwrap();
        assert!((x - 0.916291).abs() < 1e-6);
        // clamped instead of infinite
        let clamped = cross_entropy(&[1.0, 0.0], 1).unwrap();
        assert!((clamped + libm::log(PROB_FLOOR)).abs() < 1e-9);
        assert!(matches!(
            cross_entropy(&[0.5, 0.5], 2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }
}

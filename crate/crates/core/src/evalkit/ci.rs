use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const CI_Z: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    pub mean: f64,
    pub half_width: f64,
    pub k: usize,
    /// Set when `k == 1`: the spread is unknown and reported as zero.
    pub degenerate: bool,
}

/// `mean ± 1.96 · s / √k` with `s` the sample standard deviation
/// (denominator `k − 1`).
pub fn confidence_interval(values: &[f64]) -> Result<CiResult> {
    let k = values.len();
    if k == 0 {
        return Err(Error::EmptyInput("confidence interval values"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("confidence interval values"));
    }
    // A rounded sum would leave tiny deviations for constant input.
    let mean = if values.iter().all(|&v| v == values[0]) {
        values[0]
    } else {
        values.iter().sum::<f64>() / k as f64
    };
    if k == 1 {
        return Ok(CiResult {
            mean,
            half_width: 0.0,
            k,
            degenerate: true,
        });
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64;
    let std_err = libm::sqrt(var) / libm::sqrt(k as f64);
    Ok(CiResult {
        mean,
        half_width: CI_Z * std_err,
        k,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_values() {
        let ci = confidence_interval(&[0.5, 0.6, 0.7]).unwrap();
        assert!((ci.mean - 0.6).abs() < 1e-12);
        assert!((ci.half_width - 0.113161).abs() < 1e-6);
        assert!(!ci.degenerate);
    }

    #[test]
    fn zero_variance() {
        for v in [0.6, 0.42, 0.1] {
            let ci = confidence_interval(&[v; 5]).unwrap();
            assert_eq!((ci.mean, ci.half_width), (v, 0.0));
        }
    }

    #[test]
    fn single_value_is_flagged() {
        let ci = confidence_interval(&[0.4]).unwrap();
        assert_eq!((ci.mean, ci.half_width, ci.k, ci.degenerate), (0.4, 0.0, 1, true));
        assert!(confidence_interval(&[]).is_err());
    }
}

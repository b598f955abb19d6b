use crate::error::{Error, Result};
use crate::milhead::{Gradients, MilParams};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: MilParams,
    pub v: MilParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(like: &MilParams) -> Self {
        let zero = MilParams::zeros(like.attention_dim(), like.embed_dim(), like.classes());
        Self {
            m: zero.clone(),
            v: zero,
            t: 0,
        }
    }
}

/// One bias-corrected Adam update.
///
/// With coupled decay the gradient becomes `g + weight_decay · θ`; with
/// `decoupled` the decay is applied to the weights as `θ −= lr · wd · θ`.
pub fn adam_step(
    params: &mut MilParams,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
    weight_decay: f64,
    decoupled: bool,
) -> Result<()> {
    if !params.same_shape(grads) || !params.same_shape(&state.m) || !params.same_shape(&state.v) {
        return Err(Error::DimMismatch {
            what: "optimizer tensors",
            expected: params.num_params(),
            found: grads.num_params(),
        });
    }
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradient"));
    }
    state.t += 1;
    let t = state.t as i32;
    let correct1 = 1.0 - libm::pow(ADAM_BETA1, f64::from(t));
    let correct2 = 1.0 - libm::pow(ADAM_BETA2, f64::from(t));
    let params_t = params.tensors_mut();
    let m_t = state.m.tensors_mut();
    let v_t = state.v.tensors_mut();
    for (((theta, g), m), v) in params_t.into_iter().zip(grads.tensors()).zip(m_t).zip(v_t) {
        for i in 0..theta.len() {
            let grad = if decoupled {
                g[i]
            } else {
                g[i] + weight_decay * theta[i]
            };
            m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * grad;
            v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * grad * grad;
            let m_hat = m[i] / correct1;
            let v_hat = v[i] / correct2;
            if decoupled {
                theta[i] -= lr * weight_decay * theta[i];
            }
            theta[i] -= lr * m_hat / (libm::sqrt(v_hat) + ADAM_EPSILON);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_params(v: f64) -> MilParams {
        let mut p = MilParams::zeros(1, 1, 1);
        p.bc[0] = v;
        p
    }

    #[test]
    fn first_step_closed_form() {
        let mut p = scalar_params(0.0);
        let g = scalar_params(2.0);
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &g, &mut s, 1e-3, 0.0, false).unwrap();
        let expected = -1e-3 * 2.0 / (2.0 + 1e-8);
        assert!((p.bc[0] - expected).abs() < 1e-18);
        assert!((p.bc[0] + 1e-3).abs() < 1e-9);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn zero_gradient_no_decay_is_a_no_op() {
        let mut p = scalar_params(0.7);
        let g = scalar_params(0.0);
        let mut s = AdamState::new(&p);
        for _ in 0..5 {
            adam_step(&mut p, &g, &mut s, 1e-2, 0.0, false).unwrap();
        }
        assert_eq!(p.bc[0], 0.7);
    }

    #[test]
    fn weight_decay_pulls_toward_zero() {
        for decoupled in [false, true] {
            let mut p = scalar_params(0.5);
            let g = scalar_params(0.0);
            let mut s = AdamState::new(&p);
            let mut prev = p.bc[0];
            for _ in 0..10 {
                adam_step(&mut p, &g, &mut s, 1e-2, 1e-2, decoupled).unwrap();
                assert!(p.bc[0] < prev && p.bc[0] > 0.0);
                prev = p.bc[0];
            }
        }
    }

    #[test]
    fn rejects_bad_gradients() {
        let mut p = scalar_params(0.0);
        let mut s = AdamState::new(&p);
        let mut g = scalar_params(0.0);
        g.bc[0] = f64::NAN;
        assert_eq!(
            adam_step(&mut p, &g, &mut s, 1e-3, 0.0, false),
            Err(Error::NonFinite("gradient"))
        );
        assert_eq!(s.t, 0);
        let wrong = MilParams::zeros(2, 1, 1);
        assert!(adam_step(&mut p, &wrong, &mut s, 1e-3, 0.0, false).is_err());
    }
}

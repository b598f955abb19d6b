use alloc::vec::Vec;

use super::{backward, bag_loss, init_params, Bag, MilParams};
use crate::error::Result;
use crate::numerics::{finite_diff_grad, max_relative_error, DenseMatrix, DenseVector, RngStream};

/// Denominator floor of the relative error: gradient coordinates smaller
/// than this are compared in absolute terms.
pub const GRADCHECK_FLOOR: f64 = 1e-2;
/// Central-difference step.
pub const GRADCHECK_STEP: f64 = 1e-6;

/// Worst relative disagreement between [`backward`] and central differences
/// of [`bag_loss`] over all parameters.
pub fn check_gradients(params: &MilParams, bag: &Bag, h: f64) -> Result<f64> {
    let (_, analytic) = backward(params, bag)?;
    let (l, m, c) = (params.attention_dim(), params.embed_dim(), params.classes());
    let at = DenseVector::new(params.to_flat())?;
    let numeric = finite_diff_grad(
        |flat| {
            MilParams::from_flat(l, m, c, flat)
                .and_then(|p| bag_loss(&p, bag))
                .unwrap_or(f64::NAN)
        },
        &at,
        h,
    )?;
    Ok(max_relative_error(
        &analytic.to_flat(),
        numeric.as_slice(),
        GRADCHECK_FLOOR,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckCase {
    pub seed: u64,
    pub bag_size: usize,
    pub max_rel_err: f64,
}

/// Random configurations with bag sizes 1, 5 and 100, `M = 8`, `L = 4`,
/// `C = 4`: seven per seed for seeds `seed, seed + 1, seed + 2`.
pub fn gradient_check_suite(seed: u64) -> Result<Vec<GradCheckCase>> {
    const SIZES: [usize; 3] = [1, 5, 100];
    let mut cases = Vec::new();
    for s in seed..seed + 3 {
        for j in 0..7u64 {
            let mut rng = RngStream::new(s, j);
            let n = SIZES[j as usize % 3];
            let mut params = init_params(4, 8, 4, &mut rng)?;
            // larger weights make the tanh and softmax curvature visible
            for t in params.tensors_mut() {
                t.iter_mut().for_each(|v| *v *= 3.0);
            }
            params
                .bc
                .as_mut_slice()
                .iter_mut()
                .for_each(|b| *b = rng.uniform(-1.0, 1.0));
            let data = (0..n * 8).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let locations = (0..n as u32).map(|k| (k, 0)).collect();
            let bag = Bag::new(
                "gradcheck",
                Some(rng.below(4)),
                locations,
                DenseMatrix::from_vec(n, 8, data)?,
            )?;
            cases.push(GradCheckCase {
                seed: s,
                bag_size: n,
                max_rel_err: check_gradients(&params, &bag, GRADCHECK_STEP)?,
            });
        }
    }
    Ok(cases)
}

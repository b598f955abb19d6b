use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, DenseVector, RngStream};

/// Hidden width of the attention scorer unless configured otherwise.
pub const DEFAULT_ATTENTION_DIM: usize = 128;

/// Trainable tensors of the head.
///
/// * `w2`: `L × M` projection inside the attention scorer
/// * `w1`: length `L` scoring vector
/// * `wc`: `C × M` classifier weights
/// * `bc`: length `C` classifier bias
#[derive(Debug, Clone, PartialEq)]
pub struct MilParams {
    pub w2: DenseMatrix,
    pub w1: DenseVector,
    pub wc: DenseMatrix,
    pub bc: DenseVector,
}

/// Gradients share the parameter layout.
pub type Gradients = MilParams;

impl MilParams {
    pub fn zeros(attention_dim: usize, embed_dim: usize, classes: usize) -> Self {
        Self {
            w2: DenseMatrix::zeros(attention_dim, embed_dim),
            w1: DenseVector::zeros(attention_dim),
            wc: DenseMatrix::zeros(classes, embed_dim),
            bc: DenseVector::zeros(classes),
        }
    }

    pub fn attention_dim(&self) -> usize {
        self.w2.rows()
    }

    pub fn embed_dim(&self) -> usize {
        self.w2.cols()
    }

    pub fn classes(&self) -> usize {
        self.bc.len()
    }

    pub fn num_params(&self) -> usize {
        let (l, m, c) = (self.attention_dim(), self.embed_dim(), self.classes());
        l * m + l + c * m + c
    }

    pub fn same_shape(&self, other: &MilParams) -> bool {
        self.attention_dim() == other.attention_dim()
            && self.embed_dim() == other.embed_dim()
            && self.classes() == other.classes()
    }

    /// Tensors in canonical order: `w2`, `w1`, `wc`, `bc`.
    pub fn tensors(&self) -> [&[f64]; 4] {
        [
            self.w2.as_slice(),
            self.w1.as_slice(),
            self.wc.as_slice(),
            self.bc.as_slice(),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w2.as_mut_slice(),
            self.w1.as_mut_slice(),
            self.wc.as_mut_slice(),
            self.bc.as_mut_slice(),
        ]
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    pub fn from_flat(attention_dim: usize, embed_dim: usize, classes: usize, flat: &[f64]) -> Result<Self> {
        let mut p = Self::zeros(attention_dim, embed_dim, classes);
        if flat.len() != p.num_params() {
            return Err(Error::DimMismatch {
                what: "flat parameters",
                expected: p.num_params(),
                found: flat.len(),
            });
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameters"));
        }
        let mut rest = flat;
        for t in p.tensors_mut() {
            let (head, tail) = rest.split_at(t.len());
            t.copy_from_slice(head);
            rest = tail;
        }
        Ok(p)
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Uniform fan-in initialization: each weight in `±1/√fan_in`, bias zero.
pub fn init_params(attention_dim: usize, embed_dim: usize, classes: usize, rng: &mut RngStream) -> Result<MilParams> {
    if attention_dim == 0 || embed_dim == 0 || classes == 0 {
        return Err(Error::InvalidConfig(alloc::format!(
            "head dims must be positive, got L={attention_dim} M={embed_dim} C={classes}"
        )));
    }
    let mut p = MilParams::zeros(attention_dim, embed_dim, classes);
    let fill = |t: &mut [f64], fan_in: usize, rng: &mut RngStream| {
        let bound = 1.0 / libm::sqrt(fan_in as f64);
        t.iter_mut().for_each(|v| *v = rng.uniform(-bound, bound));
    };
    fill(p.w2.as_mut_slice(), embed_dim, rng);
    fill(p.w1.as_mut_slice(), attention_dim, rng);
    fill(p.wc.as_mut_slice(), embed_dim, rng);
    Ok(p)
}

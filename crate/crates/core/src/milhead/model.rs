use alloc::vec;
use alloc::vec::Vec;

use super::{Bag, Gradients, MilParams};
use crate::error::{Error, Result};
use crate::numerics::{cross_entropy, dot, softmax_in_place, DenseVector};

/// Everything a forward pass produces for one bag.
#[derive(Debug, Clone, PartialEq)]
pub struct BagOutput {
    /// One weight per instance, summing to 1.
    pub attention: DenseVector,
    /// Attention-pooled embedding `A`.
    pub bag_vector: DenseVector,
    pub logits: DenseVector,
    pub probs: DenseVector,
}

/// Anything that maps a bag to class probabilities and attention weights.
pub trait BagModel {
    fn predict(&self, bag: &Bag) -> Result<BagOutput>;
}

impl BagModel for MilParams {
    fn predict(&self, bag: &Bag) -> Result<BagOutput> {
        forward(self, bag)
    }
}

impl<T: BagModel + ?Sized> BagModel for &T {
    fn predict(&self, bag: &Bag) -> Result<BagOutput> {
        (**self).predict(bag)
    }
}

struct Trace {
    out: BagOutput,
    /// `tanh(W2 V_k)` for every instance, `N × L` row-major.
    hidden: Vec<f64>,
}

fn check_dims(params: &MilParams, bag: &Bag) -> Result<()> {
    if bag.dim() != params.embed_dim() {
        return Err(Error::DimMismatch {
            what: "bag embedding",
            expected: params.embed_dim(),
            found: bag.dim(),
        });
    }
    Ok(())
}

fn forward_trace(params: &MilParams, bag: &Bag) -> Result<Trace> {
    check_dims(params, bag)?;
    let n = bag.len();
    let l = params.attention_dim();
    let mut hidden = Vec::with_capacity(n * l);
    let mut scores = Vec::with_capacity(n);
    for k in 0..n {
        let h: Vec<f64> = params.w2.matvec(bag.instance(k)).into_iter().map(libm::tanh).collect();
        scores.push(params.w1.dot(&h));
        hidden.extend(h);
    }
    softmax_in_place(&mut scores)?;
    let attention = scores;

    let mut pooled = vec![0.0; bag.dim()];
    for (k, &a) in attention.iter().enumerate() {
        for (p, v) in pooled.iter_mut().zip(bag.instance(k)) {
            *p += a * v;
        }
    }
    let mut logits = params.wc.matvec(&pooled);
    for (z, b) in logits.iter_mut().zip(params.bc.as_slice()) {
        *z += b;
    }
    let mut probs = logits.clone();
    softmax_in_place(&mut probs)?;

    let finite = |v: Vec<f64>, what| DenseVector::new(v).map_err(|_| Error::NonFinite(what));
    Ok(Trace {
        out: BagOutput {
            attention: finite(attention, "attention")?,
            bag_vector: finite(pooled, "bag vector")?,
            logits: finite(logits, "logits")?,
            probs: finite(probs, "probabilities")?,
        },
        hidden,
    })
}

pub fn forward(params: &MilParams, bag: &Bag) -> Result<BagOutput> {
    forward_trace(params, bag).map(|t| t.out)
}

fn labeled(params: &MilParams, bag: &Bag) -> Result<usize> {
    let label = bag.label().ok_or(Error::MissingLabel)?;
    if label >= params.classes() {
        return Err(Error::ClassOutOfRange {
            class: label,
            classes: params.classes(),
        });
    }
    Ok(label)
}

/// Cross-entropy of the forward probabilities against the bag label.
pub fn bag_loss(params: &MilParams, bag: &Bag) -> Result<f64> {
    let label = labeled(params, bag)?;
    let out = forward(params, bag)?;
    cross_entropy(out.probs.as_slice(), label)
}

/// Loss and its gradient with respect to every head tensor.
pub fn backward(params: &MilParams, bag: &Bag) -> Result<(f64, Gradients)> {
    let label = labeled(params, bag)?;
    let Trace { out, hidden } = forward_trace(params, bag)?;
    let loss = cross_entropy(out.probs.as_slice(), label)?;
    let (n, l) = (bag.len(), params.attention_dim());
    let mut grads = MilParams::zeros(l, params.embed_dim(), params.classes());

    // softmax + cross-entropy fused: dL/dz = p - onehot(label)
    let mut dz = out.probs.as_slice().to_vec();
    dz[label] -= 1.0;
    grads.bc.as_mut_slice().copy_from_slice(&dz);
    grads.wc.add_outer(1.0, &dz, out.bag_vector.as_slice());

    // dL/dA, then dL/da_k = V_k · dA
    let d_pooled = params.wc.matvec_transposed(&dz);
    let d_attn: Vec<f64> = (0..n).map(|k| dot(bag.instance(k), &d_pooled)).collect();

    // through the attention softmax: ds_k = a_k (da_k - Σ_j a_j da_j)
    let a = out.attention.as_slice();
    let mean: f64 = a.iter().zip(&d_attn).map(|(x, y)| x * y).sum();
    for k in 0..n {
        let ds = a[k] * (d_attn[k] - mean);
        if ds == 0.0 {
            continue;
        }
        let h = &hidden[k * l..(k + 1) * l];
        for (g, &hv) in grads.w1.as_mut_slice().iter_mut().zip(h) {
            *g += ds * hv;
        }
        // dL/du = ds · w1 ⊙ (1 - h²)
        let du: Vec<f64> = params
            .w1
            .as_slice()
            .iter()
            .zip(h)
            .map(|(&w, &hv)| ds * w * (1.0 - hv * hv))
            .collect();
        grads.w2.add_outer(1.0, &du, bag.instance(k));
    }

    if !grads.is_finite() {
        return Err(Error::NonFinite("gradients"));
    }
    Ok((loss, grads))
}

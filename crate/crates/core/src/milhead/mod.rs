//! Attention-MIL head.
//!
//! For a bag of instance embeddings `V_1..V_N` the head computes
//!
//! ```text
//! s_k = w1 · tanh(W2 V_k)        attention score, no bias terms
//! a   = softmax(s)               attention weights over the bag
//! A   = Σ_k a_k V_k              pooled bag vector
//! z   = Wc A + bc                class logits
//! p   = softmax(z)
//! ```
//!
//! and is trained with cross-entropy on `p`. Gradients are derived by hand in
//! [`backward`]; embeddings are constants.

mod bag;
mod checkpoint;
mod gradcheck;
mod model;
mod params;

pub use bag::Bag;
pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, encoded_checkpoint_len, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use gradcheck::{check_gradients, gradient_check_suite, GradCheckCase, GRADCHECK_FLOOR, GRADCHECK_STEP};
pub use model::{backward, bag_loss, forward, BagModel, BagOutput};
pub use params::{init_params, Gradients, MilParams, DEFAULT_ATTENTION_DIM};

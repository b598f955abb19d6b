//! Dense real arithmetic, activation and loss primitives, the seeded
//! counter-based generator, and the finite-difference gradient oracle.

mod gradcheck;
mod linalg;
mod ops;
mod rng;

pub use gradcheck::{finite_diff_grad, max_relative_error, relative_error};
pub(crate) use linalg::dot;
pub use linalg::{DenseMatrix, DenseVector};
pub use ops::{cross_entropy, softmax, softmax_in_place, PROB_FLOOR};
pub use rng::{stream_id, RngStream};

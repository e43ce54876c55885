//! Numeric substrate: dense `f64` tensors, a splittable counter-based random
//! stream with the samplers built on it, and the central-difference gradient
//! oracle used by every backward-pass test.

mod fdiff;
mod rng;
mod tensor;

pub use fdiff::finite_diff_grad;
pub use rng::{sample_bernoulli_mask, sample_gaussian, sample_rademacher, RngStream};
pub use tensor::Tensor;

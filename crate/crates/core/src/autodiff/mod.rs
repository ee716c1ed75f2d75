//! Small dense-tensor engine with reverse-mode differentiation.
//!
//! A [`Tape`] records every operation of one forward pass; parameters enter
//! it as tagged leaves so that their gradients can be read back after
//! [`Tape::backward`]. Everything is `f64`.

mod optim;
mod params;
mod tape;
mod tensor;

use thiserror::Error;

pub use optim::Adam;
pub use params::{ParamStore, SavedTensor};
pub use tape::{Reduce, Tape, Var};
pub use tensor::Tensor;


#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    ShapeMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("backward needs a 1x1 loss, got shape {0:?}")]
    NotScalar((usize, usize)),
    #[error("tape already consumed by a previous backward pass")]
    TapeConsumed,
    #[error("non-finite loss value {0}")]
    NonFiniteLoss(f64),
    #[error("{0}")]
    InvalidArgument(String),
}

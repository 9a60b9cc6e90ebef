//! Forward jets recorded on a reverse tape.
//!
//! Input derivatives (up to second order, a few tracked inputs) are carried
//! forward by [`Jet2`]; the gradient of any scalar built from jet components
//! with respect to the parameters comes from a reverse sweep over a [`Tape`].

mod fd;
mod jet;
mod scalar;
mod tape;

pub use fd::{central_difference, fd_check, fd_check_at};
pub use jet::{component_count, ArithOp, Jet1, Jet2, MAX_VARS};
pub use scalar::Scalar;
pub use tape::{Adjoints, Tape, Var};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdError {
    #[error("input index {index} out of range for {k} tracked variables")]
    IndexOutOfRange { index: usize, k: usize },
    #[error("unsupported tracked-variable count {0} (expected 1..=4)")]
    BadTrackedCount(usize),
    #[error("domain error in {op} with operands {operands:?}")]
    Domain { op: &'static str, operands: Vec<f64> },
    #[error("non-finite value at tape node {node} ({op}) during reverse sweep")]
    NonFinite { node: usize, op: &'static str },
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
    #[error("dimension mismatch: got {0}, expected {1}")]
    DimMismatch(usize, usize),
}

//! Feedforward approximant: architecture, parameters, jet evaluation,
//! input/output scaling and hard-constraint transforms.

mod constraints;
mod mlp;
mod scaling;
mod spec;

pub use constraints::{
    apply_constraints_1d, apply_constraints_2d, Constraint1D, Constraint2D, Fields1D, Fields2D, Outputs1D, Outputs2D,
};
pub use mlp::{backward_batch, forward_batch, forward_generic, forward_jet, BatchInput, BatchTrace};
pub use scaling::{InputScale, OutputScale, ScalingRules};
pub use spec::{init_params, Activation, Layout, NetworkSpec, ParameterSet, Slot};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("invalid scaling: {0}")]
    InvalidScaling(String),
    #[error("expected {expected} inputs, got {got}")]
    InputCount { got: usize, expected: usize },
    #[error("expected {expected} parameters, got {got}")]
    ParamCount { got: usize, expected: usize },
    #[error("non-finite activation in layer {layer}")]
    NonFinite { layer: usize },
}

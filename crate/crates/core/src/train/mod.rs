//! Loss assembly, Adam with a linear learning-rate ramp, validation-based
//! early stopping and the training loop.

mod adam;
mod fit;
mod loss;
mod sampling;

pub use adam::{adam_step, lr_schedule, AdamConfig, AdamState};
pub use fit::{fit, fit_observed, write_history, write_history_header, write_history_row, FitObserver, FitResult, HistoryRow, StopReason, TrainConfig, THREADS_ENV};
pub use loss::{compute_loss, LossReport, LossWeights, CHUNK};
pub use sampling::{sample_points, CollocationBatch, Role};

use thiserror::Error;

use crate::problem::PhysicsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("non-finite {what} at point {coords:?}")]
    NonFinite { what: String, coords: Vec<f64> },
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("batch has {got} coordinates per point, problem expects {expected}")]
    Dimension { got: usize, expected: usize },
}

impl From<crate::net::NetError> for TrainError {
    fn from(e: crate::net::NetError) -> Self {
        TrainError::Physics(e.into())
    }
}

impl From<crate::ad::AdError> for TrainError {
    fn from(e: crate::ad::AdError) -> Self {
        TrainError::Physics(e.into())
    }
}

//! Interface between the physics modules and the trainer.

use crate::ad::{Jet2, Scalar};
use crate::net::NetworkSpec;
use thiserror::Error;

use crate::ad::AdError;
use crate::net::NetError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("effective flow rate {value} is not positive; the regularization floor was bypassed")]
    BelowFloor { value: f64 },
    #[error(transparent)]
    Ad(#[from] AdError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Loss terms, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Macro,
    Micro,
    Hardening,
    Mixed,
    Evolution,
    Penalty,
}

pub const N_TERMS: usize = 6;

impl Term {
    pub const ALL: [Term; N_TERMS] = [
        Term::Macro,
        Term::Micro,
        Term::Hardening,
        Term::Mixed,
        Term::Evolution,
        Term::Penalty,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Term::Macro => "macro",
            Term::Micro => "micro",
            Term::Hardening => "hardening",
            Term::Mixed => "mixed",
            Term::Evolution => "evolution",
            Term::Penalty => "penalty",
        }
    }
}

/// Per-point squared residuals accumulated by term.
#[derive(Debug, Clone, Copy)]
pub struct TermValues<S> {
    pub values: [S; N_TERMS],
}

impl<S: Scalar> TermValues<S> {
    pub fn new() -> Self {
        TermValues {
            values: [S::zero(); N_TERMS],
        }
    }

    /// Adds `r²` to `term`.
    pub fn add_square(&mut self, term: Term, r: S) {
        let i = term.index();
        self.values[i] = self.values[i] + r * r;
    }

    /// Adds an already non-negative penalty to `term`.
    pub fn add(&mut self, term: Term, v: S) {
        let i = term.index();
        self.values[i] = self.values[i] + v;
    }
}

impl<S: Scalar> Default for TermValues<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// A residual-minimization problem posed on a network.
pub trait Problem: Sync {
    fn network(&self) -> &NetworkSpec;

    /// Number of leading network inputs that carry derivatives.
    fn tracked(&self) -> usize;

    /// Number of sampled coordinates per point, equal to the network input count.
    fn dim(&self) -> usize {
        self.network().n_inputs()
    }

    /// Hook to adjust the `index`-th sampled point (e.g. snap a parameter
    /// coordinate onto its training grid).
    fn prepare_point(&self, _index: usize, _coords: &mut [f64]) {}

    /// Squared residuals at one point given the raw network outputs there.
    fn point_terms<S: Scalar>(&self, coords: &[f64], raw: &[Jet2<S>]) -> Result<TermValues<S>, PhysicsError>;
}

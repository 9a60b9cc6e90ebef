//! Classical reference solvers for the 1D strip.
//!
//! Both integrators work in scaled variables: `x = γᵖ/(S0/μ)`, `t̂ = t/t_max`,
//! `τ̂ = τ/S0`, `Ŝ = S/S0`. With `A = Γ_max/(S0/μ)` and `B = (S0/μ)/(t_max·d0)`
//! the flow rule reads `dx/dt̂ = φ(σ̂/Ŝ)/B` where `φ(q) = sgn(q)|q|^(1/m)`.
//! Time stepping is backward Euler with a rate-difference error estimate
//! bounded by `tol·h·max(1, |rate|)`, so the global error scales with `tol`
//! relative to the size of the solution.

mod export;
mod march;
mod mol;
mod ode;

pub use export::{oracle_export, parse_table, Table};
pub use mol::{mol_energetic, mol_energetic_with, MolSeries};
pub use ode::{homogeneous_ode, homogeneous_ode_with, OdePoint, OdeSeries};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle precondition violated: {0}")]
    Precondition(String),
    #[error("Newton iteration failed at t = {t:.6e} s with step {h:.3e} s after all halvings")]
    NewtonFailure { t: f64, h: f64 },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Step control shared by both oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    /// Allowed local error per unit scaled time, in units of `S0/μ`.
    pub tol: f64,
    /// Number of equally spaced output times including 0 and t_max.
    pub n_out: usize,
    /// Smallest scaled step before giving up.
    pub h_min: f64,
    pub h_max: f64,
    pub max_newton: usize,
}

impl StepOptions {
    pub fn new(tol: f64) -> Self {
        StepOptions {
            tol,
            n_out: 251,
            h_min: 1e-14,
            h_max: 0.02,
            max_newton: 60,
        }
    }
}

/// `sgn(q)·|q|^p`.
fn signed_pow(q: f64, p: f64) -> f64 {
    q.signum() * q.abs().powf(p)
}

fn signed_pow_deriv(q: f64, p: f64) -> f64 {
    if q == 0.0 {
        0.0
    } else {
        p * q.abs().powf(p - 1.0)
    }
}

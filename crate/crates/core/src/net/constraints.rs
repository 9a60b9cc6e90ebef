//! Hard encoding of boundary and initial conditions.
//!
//! Raw network outputs are combined with fixed polynomial factors so the
//! Dirichlet displacement conditions, the zero initial fields and (when a
//! length scale is active) the microscopically hard walls hold for every θ.
//! All quantities are in scaled units: coordinates in `[0, 1]`, displacement
//! over the maximum applied displacement, plastic strain over `S0/μ`,
//! resistance over `S0`.

use serde::{Deserialize, Serialize};

use crate::ad::{Jet2, Scalar};

/// Positions of the 1D fields among the raw network outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outputs1D {
    pub u: usize,
    pub gamma: usize,
    pub resistance: Option<usize>,
    pub micro_gradient: Option<usize>,
}

/// Shape options of the 1D transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint1D {
    /// Multiply γ̂ by ŷ(1−ŷ) so that γ̇ᵖ vanishes at both walls.
    pub hard_walls: bool,
    /// Constant gain on the plastic-strain channel.
    pub plastic_gain: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Fields1D<S> {
    pub u: Jet2<S>,
    pub gamma: Jet2<S>,
    pub resistance: Option<Jet2<S>>,
    pub micro_gradient: Option<Jet2<S>>,
}

/// `y`, `t` are the scaled coordinate jets and `top` is û†(t̂), the scaled
/// top displacement with û†(0) = 0.
pub fn apply_constraints_1d<S: Scalar>(
    raw: &[Jet2<S>],
    y: &Jet2<S>,
    t: &Jet2<S>,
    top: &Jet2<S>,
    outputs: &Outputs1D,
    c: &Constraint1D,
) -> Fields1D<S> {
    let bubble = *y * (-*y).add_f(1.0);
    let u = *y * *top + bubble * *t * raw[outputs.u];
    let wall = if c.hard_walls { bubble * *t } else { *t };
    let gamma = (wall * raw[outputs.gamma]).scale(c.plastic_gain);
    let resistance = outputs.resistance.map(|i| (*t * raw[i]).add_f(1.0));
    let micro_gradient = outputs.micro_gradient.map(|i| raw[i]);
    Fields1D {
        u,
        gamma,
        resistance,
        micro_gradient,
    }
}

/// Positions of the 2D fields among the raw network outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outputs2D {
    pub u1: usize,
    pub u2: usize,
    pub gamma: usize,
    pub ep11: usize,
    pub ep22: usize,
    pub ep12: usize,
    pub xi: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint2D {
    pub hard_walls: bool,
    pub plastic_gain: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Fields2D<S> {
    pub u1: Jet2<S>,
    pub u2: Jet2<S>,
    pub gamma: Jet2<S>,
    /// In-plane plastic strain components (11, 22, 12); the 33 component is −(11+22).
    pub ep: [Jet2<S>; 3],
    pub xi: Option<[Jet2<S>; 2]>,
}

/// Inputs are the scaled jets of x1, x2, t and û*(t̂).
pub fn apply_constraints_2d<S: Scalar>(
    raw: &[Jet2<S>],
    x2: &Jet2<S>,
    t: &Jet2<S>,
    top: &Jet2<S>,
    outputs: &Outputs2D,
    c: &Constraint2D,
) -> Fields2D<S> {
    let bubble = *x2 * (-*x2).add_f(1.0);
    let bt = bubble * *t;
    let u1 = *x2 * *top + bt * raw[outputs.u1];
    let u2 = bt * raw[outputs.u2];
    let wall = if c.hard_walls { bt } else { *t };
    let gamma = (wall * raw[outputs.gamma]).scale(c.plastic_gain);
    let g = c.plastic_gain;
    let ep = [
        (*t * raw[outputs.ep11]).scale(g),
        (*t * raw[outputs.ep22]).scale(g),
        (*t * raw[outputs.ep12]).scale(g),
    ];
    let xi = outputs.xi.map(|(a, b)| [raw[a], raw[b]]);
    Fields2D { u1, u2, gamma, ep, xi }
}

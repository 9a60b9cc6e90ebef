use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CollocationBatch, TrainError};
use crate::ad::{AdError, Jet2, Scalar, Tape, Var};
use crate::net::{backward_batch, forward_batch, BatchInput};
use crate::problem::{Problem, Term, N_TERMS};

/// Points per evaluation chunk. Fixed so that the reduction order, and hence
/// every bit of the result, does not depend on the worker count.
pub const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub values: [f64; N_TERMS],
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { values: [1.0; N_TERMS] }
    }
}

impl LossWeights {
    pub fn zeros() -> Self {
        LossWeights { values: [0.0; N_TERMS] }
    }

    pub fn get(&self, t: Term) -> f64 {
        self.values[t.index()]
    }

    pub fn with(mut self, t: Term, w: f64) -> Self {
        self.values[t.index()] = w;
        self
    }
}

/// Mean-squared residual per term, the weights used, and the weighted total.
/// Boundary and initial data are encoded exactly, so `data` is always zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub terms: [f64; N_TERMS],
    pub weights: LossWeights,
    pub data: f64,
    pub total: f64,
}

impl LossReport {
    pub fn term(&self, t: Term) -> f64 {
        self.terms[t.index()]
    }
}

struct ChunkOut {
    sums: [f64; N_TERMS],
    grad: Option<Vec<f64>>,
}

fn non_finite(what: &str, coords: &[f64]) -> TrainError {
    TrainError::NonFinite {
        what: what.to_string(),
        coords: coords.to_vec(),
    }
}

fn eval_chunk<P: Problem>(
    problem: &P,
    theta: &[f64],
    pts: &[&[f64]],
    weights: &LossWeights,
    n_total: usize,
    want_grad: bool,
) -> Result<ChunkOut, TrainError> {
    let spec = problem.network();
    let k = problem.tracked();
    let input = BatchInput::seeded(pts, spec.n_inputs(), k)?;
    let trace = forward_batch(spec, theta, &input)?;
    let no = trace.n_outputs();
    let nc = trace.n_components();
    let mut sums = [0.0; N_TERMS];

    if !want_grad {
        for (p, coords) in pts.iter().enumerate() {
            let raw: Vec<Jet2<f64>> = (0..no).map(|o| trace.output_jet(p, o)).collect();
            let tv = problem.point_terms(coords, &raw)?;
            for (i, t) in Term::ALL.iter().enumerate() {
                let v = tv.values[i];
                if !v.is_finite() {
                    return Err(non_finite(t.name(), coords));
                }
                sums[i] += v;
            }
        }
        return Ok(ChunkOut { sums, grad: None });
    }

    let mut adjoint = trace.adjoint_buffer();
    let mut tape = Tape::with_capacity(4096);
    let inv_n = 1.0 / n_total as f64;
    for (p, coords) in pts.iter().enumerate() {
        tape.clear();
        let t = &tape;
        let mut leaves: Vec<Var> = Vec::with_capacity(no * nc);
        let mut raw = Vec::with_capacity(no);
        for o in 0..no {
            let start = leaves.len();
            leaves.extend(trace.output_components(p, o).iter().map(|&x| t.leaf(x)));
            raw.push(Jet2::from_components(k, &leaves[start..])?);
        }
        let tv = problem.point_terms(coords, &raw)?;
        let mut total = Var::constant(0.0);
        for (i, term) in Term::ALL.iter().enumerate() {
            let v = tv.values[i];
            if !v.is_finite() {
                return Err(non_finite(term.name(), coords));
            }
            sums[i] += v.value();
            if weights.values[i] != 0.0 {
                total = total + v.mul_f(weights.values[i]);
            }
        }
        let adj = t.backward(total).map_err(|e| match e {
            AdError::NonFinite { op, .. } => non_finite(&format!("adjoint ({op})"), coords),
            e => e.into(),
        })?;
        for o in 0..no {
            let slot = trace.adjoint_slot(&mut adjoint, p, o);
            for (c, s) in slot.iter_mut().enumerate() {
                *s = adj.wrt(leaves[o * nc + c]) * inv_n;
            }
        }
    }
    let mut grad = vec![0.0; theta.len()];
    backward_batch(spec, theta, &trace, &adjoint, &mut grad)?;
    Ok(ChunkOut { sums, grad: Some(grad) })
}

/// Weighted mean-squared loss over `batch`, with the parameter gradient when
/// `want_grad` is set. Runs on the current rayon pool.
pub fn compute_loss<P: Problem>(
    problem: &P,
    theta: &[f64],
    batch: &CollocationBatch,
    weights: &LossWeights,
    want_grad: bool,
) -> Result<(LossReport, Option<Vec<f64>>), TrainError> {
    if batch.dim != problem.dim() {
        return Err(TrainError::Dimension {
            got: batch.dim,
            expected: problem.dim(),
        });
    }
    let pts: Vec<&[f64]> = batch.points().collect();
    let n = pts.len();
    let outs: Vec<Result<ChunkOut, TrainError>> = pts
        .par_chunks(CHUNK)
        .map(|c| eval_chunk(problem, theta, c, weights, n, want_grad))
        .collect();
    let mut sums = [0.0; N_TERMS];
    let mut grad = want_grad.then(|| vec![0.0; theta.len()]);
    for out in outs {
        let out = out?;
        for i in 0..N_TERMS {
            sums[i] += out.sums[i];
        }
        if let (Some(g), Some(cg)) = (grad.as_mut(), out.grad) {
            for (a, b) in g.iter_mut().zip(cg) {
                *a += b;
            }
        }
    }
    let terms = sums.map(|s| s / n as f64);
    let total = terms.iter().zip(weights.values.iter()).map(|(t, w)| t * w).sum();
    Ok((
        LossReport {
            terms,
            weights: *weights,
            data: 0.0,
            total,
        },
        grad,
    ))
}

//! Scalar reverse-mode tape.
//!
//! Every non-constant operation on a [`Var`] appends one node holding the
//! operation kind, up to two parent indices and the computed value. Constants
//! never touch the tape; operations on two constants fold immediately. A
//! reverse sweep seeded at one node yields adjoints for every node, from which
//! leaf gradients are read.

use std::cell::RefCell;
use std::ops::{Add, Mul, Neg, Sub};

use super::{AdError, Scalar};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Leaf,
    Add,
    Sub,
    Mul,
    Neg,
    AddC(f64),
    MulC(f64),
    Recip,
    Tanh,
    Sqrt,
    Powf(f64),
    Exp,
    Ln,
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Neg => "neg",
            Op::AddC(_) => "add_const",
            Op::MulC(_) => "mul_const",
            Op::Recip => "recip",
            Op::Tanh => "tanh",
            Op::Sqrt => "sqrt",
            Op::Powf(_) => "powf",
            Op::Exp => "exp",
            Op::Ln => "ln",
        }
    }

    fn eval(&self, a: f64, b: f64) -> f64 {
        match *self {
            Op::Leaf => a,
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => a * b,
            Op::Neg => -a,
            Op::AddC(c) => a + c,
            Op::MulC(c) => a * c,
            Op::Recip => 1.0 / a,
            Op::Tanh => a.tanh(),
            Op::Sqrt => a.sqrt(),
            Op::Powf(p) => a.powf(p),
            Op::Exp => a.exp(),
            Op::Ln => a.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    op: Op,
    a: u32,
    b: u32,
    value: f64,
}

/// Ordered record of primitive operations.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Adjoints produced by one reverse sweep.
#[derive(Debug, Clone)]
pub struct Adjoints {
    adj: Vec<f64>,
}

impl Adjoints {
    /// Adjoint of `v`; zero for constants and for nodes not upstream of the seed.
    pub fn wrt(&self, v: Var<'_>) -> f64 {
        if v.idx == NONE {
            0.0
        } else {
            self.adj.get(v.idx as usize).copied().unwrap_or(0.0)
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            nodes: RefCell::new(Vec::with_capacity(n)),
        }
    }

    /// Drops all nodes but keeps the allocation. Any `Var` issued before is invalidated.
    pub fn clear(&mut self) {
        self.nodes.get_mut().clear();
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records an independent variable.
    pub fn leaf(&self, x: f64) -> Var<'_> {
        let idx = self.push(Op::Leaf, NONE, NONE, x);
        Var {
            tape: Some(self),
            idx,
            val: x,
        }
    }

    fn push(&self, op: Op, a: u32, b: u32, value: f64) -> u32 {
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len() as u32;
        nodes.push(Node { op, a, b, value });
        idx
    }

    /// Re-evaluates every node from the recorded leaf values.
    pub fn replay(&self) -> Vec<f64> {
        let nodes = self.nodes.borrow();
        let mut vals: Vec<f64> = Vec::with_capacity(nodes.len());
        for n in nodes.iter() {
            let v = match n.op {
                Op::Leaf => n.value,
                op => {
                    let a = vals[n.a as usize];
                    let b = if n.b == NONE { 0.0 } else { vals[n.b as usize] };
                    op.eval(a, b)
                }
            };
            vals.push(v);
        }
        vals
    }

    /// Values as recorded during the forward evaluation.
    pub fn recorded_values(&self) -> Vec<f64> {
        self.nodes.borrow().iter().map(|n| n.value).collect()
    }

    /// Reverse sweep from `out`. Does not modify the tape, so repeated calls agree.
    pub fn backward(&self, out: Var<'_>) -> Result<Adjoints, AdError> {
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; nodes.len()];
        if out.idx == NONE {
            return Ok(Adjoints { adj });
        }
        adj[out.idx as usize] = 1.0;
        for i in (0..=out.idx as usize).rev() {
            let g = adj[i];
            if g == 0.0 {
                continue;
            }
            let n = nodes[i];
            if !g.is_finite() || !n.value.is_finite() {
                return Err(AdError::NonFinite {
                    node: i,
                    op: n.op.name(),
                });
            }
            let va = if n.a == NONE { 0.0 } else { nodes[n.a as usize].value };
            match n.op {
                Op::Leaf => {}
                Op::Add => {
                    adj[n.a as usize] += g;
                    adj[n.b as usize] += g;
                }
                Op::Sub => {
                    adj[n.a as usize] += g;
                    adj[n.b as usize] -= g;
                }
                Op::Mul => {
                    let vb = nodes[n.b as usize].value;
                    adj[n.a as usize] += g * vb;
                    adj[n.b as usize] += g * va;
                }
                Op::Neg => adj[n.a as usize] -= g,
                Op::AddC(_) => adj[n.a as usize] += g,
                Op::MulC(c) => adj[n.a as usize] += g * c,
                Op::Recip => adj[n.a as usize] -= g * n.value * n.value,
                Op::Tanh => adj[n.a as usize] += g * (1.0 - n.value * n.value),
                Op::Sqrt => adj[n.a as usize] += g * 0.5 / n.value,
                Op::Powf(p) => adj[n.a as usize] += g * p * va.powf(p - 1.0),
                Op::Exp => adj[n.a as usize] += g * n.value,
                Op::Ln => adj[n.a as usize] += g / va,
            }
        }
        Ok(Adjoints { adj })
    }

    /// Gradient of `out` with respect to `leaves`, in the order given.
    pub fn gradient(&self, out: Var<'_>, leaves: &[Var<'_>]) -> Result<Vec<f64>, AdError> {
        let adj = self.backward(out)?;
        Ok(leaves.iter().map(|&v| adj.wrt(v)).collect())
    }
}

/// Scalar handle into a [`Tape`]; constants carry no tape reference.
#[derive(Debug, Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    idx: u32,
    val: f64,
}

impl<'t> Var<'t> {
    pub fn constant(x: f64) -> Self {
        Var {
            tape: None,
            idx: NONE,
            val: x,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.idx == NONE
    }

    pub fn index(&self) -> Option<usize> {
        (self.idx != NONE).then_some(self.idx as usize)
    }

    fn unary(self, op: Op) -> Self {
        let val = op.eval(self.val, 0.0);
        match self.tape {
            Some(t) => Var {
                tape: Some(t),
                idx: t.push(op, self.idx, NONE, val),
                val,
            },
            None => Var::constant(val),
        }
    }

    fn binary(self, rhs: Self, op: Op) -> Self {
        let val = op.eval(self.val, rhs.val);
        match (self.tape, rhs.tape) {
            (None, None) => Var::constant(val),
            (Some(t), _) | (None, Some(t)) => {
                // constant operands become tape leaves so the node has two parents
                let a = if self.idx == NONE { t.push(Op::Leaf, NONE, NONE, self.val) } else { self.idx };
                let b = if rhs.idx == NONE { t.push(Op::Leaf, NONE, NONE, rhs.val) } else { rhs.idx };
                Var {
                    tape: Some(t),
                    idx: t.push(op, a, b, val),
                    val,
                }
            }
        }
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if rhs.is_constant() {
            return self.add_f(rhs.val);
        }
        if self.is_constant() {
            return rhs.add_f(self.val);
        }
        self.binary(rhs, Op::Add)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        if rhs.is_constant() {
            return self.add_f(-rhs.val);
        }
        if self.is_constant() && self.val == 0.0 {
            return -rhs;
        }
        self.binary(rhs, Op::Sub)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if rhs.is_constant() {
            return self.mul_f(rhs.val);
        }
        if self.is_constant() {
            return rhs.mul_f(self.val);
        }
        self.binary(rhs, Op::Mul)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary(Op::Neg)
    }
}

impl<'t> Scalar for Var<'t> {
    fn from_f64(x: f64) -> Self {
        Var::constant(x)
    }
    fn value(&self) -> f64 {
        self.val
    }
    fn add_f(self, c: f64) -> Self {
        if c == 0.0 {
            self
        } else {
            self.unary(Op::AddC(c))
        }
    }
    fn mul_f(self, c: f64) -> Self {
        if c == 1.0 {
            self
        } else if c == 0.0 {
            Var::constant(0.0)
        } else {
            self.unary(Op::MulC(c))
        }
    }
    fn recip(self) -> Self {
        self.unary(Op::Recip)
    }
    fn tanh(self) -> Self {
        self.unary(Op::Tanh)
    }
    fn sqrt(self) -> Self {
        self.unary(Op::Sqrt)
    }
    fn powf(self, p: f64) -> Self {
        self.unary(Op::Powf(p))
    }
    fn exp(self) -> Self {
        self.unary(Op::Exp)
    }
    fn ln(self) -> Self {
        self.unary(Op::Ln)
    }
}

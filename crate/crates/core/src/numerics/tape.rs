//! Scalar reverse-mode automatic differentiation.
//!
//! Every arithmetic operation on a [`Var`] appends a node to its [`Tape`]
//! holding the node's value and the local partial derivatives with respect
//! to its (at most two) parents. A single reverse sweep over the node list
//! then accumulates adjoints.
//!
//! ```
//! use ftnpl::numerics::Tape;
//!
//! let tape = Tape::new();
//! let x = tape.var(3.0);
//! let y = x * x + x.tanh();
//! let grads = tape.gradient(y, &[x]);
//! assert!((grads[0] - (6.0 + 1.0 - 3.0f64.tanh().powi(2))).abs() < 1e-12);
//! ```

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// The primitive that produced a tape node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Input,
    Const,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Tanh,
    Relu,
    Ln,
    Exp,
    Square,
    Softplus,
    Clamp,
}

impl Op {
    pub fn name(self) -> &'static str {
        match self {
            Op::Input => "input",
            Op::Const => "const",
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Div => "div",
            Op::Neg => "neg",
            Op::Tanh => "tanh",
            Op::Relu => "relu",
            Op::Ln => "ln",
            Op::Exp => "exp",
            Op::Square => "square",
            Op::Softplus => "softplus",
            Op::Clamp => "clamp",
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    op: Op,
    value: f64,
    parents: [usize; 2],
    partials: [f64; 2],
    arity: u8,
}

/// Append-only record of a computation.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

impl fmt::Debug for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tape").field("len", &self.len()).finish()
    }
}

/// A scalar living on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    index: usize,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var({} @ {})", self.value, self.index)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Tape {
            nodes: RefCell::new(Vec::with_capacity(n)),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, op: Op, value: f64, parents: [usize; 2], partials: [f64; 2], arity: u8) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let index = nodes.len();
        nodes.push(Node {
            op,
            value,
            parents,
            partials,
            arity,
        });
        Var {
            tape: self,
            index,
            value,
        }
    }

    /// An independent variable.
    pub fn var(&self, value: f64) -> Var<'_> {
        self.push(Op::Input, value, [0; 2], [0.0; 2], 0)
    }

    pub fn vars(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.var(v)).collect()
    }

    /// A constant; gradients never flow into it.
    pub fn constant(&self, value: f64) -> Var<'_> {
        self.push(Op::Const, value, [0; 2], [0.0; 2], 0)
    }

    pub fn constants(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.constant(v)).collect()
    }

    /// Adjoints of `output` with respect to every node on the tape.
    pub fn adjoints(&self, output: Var<'_>) -> Vec<f64> {
        debug_assert!(std::ptr::eq(output.tape, self), "variable from another tape");
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; output.index + 1];
        adj[output.index] = 1.0;
        for i in (0..=output.index).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let node = &nodes[i];
            for k in 0..node.arity as usize {
                adj[node.parents[k]] += a * node.partials[k];
            }
        }
        adj
    }

    /// Gradient of `output` with respect to each entry of `wrt`.
    pub fn gradient(&self, output: Var<'_>, wrt: &[Var<'_>]) -> Vec<f64> {
        let adj = self.adjoints(output);
        let nodes = self.nodes.borrow();
        wrt.iter()
            .map(|v| match nodes[v.index].op {
                Op::Const => 0.0,
                _ => adj.get(v.index).copied().unwrap_or(0.0),
            })
            .collect()
    }

    /// Fails with the first primitive whose value is not finite.
    pub fn check_finite(&self) -> Result<()> {
        let nodes = self.nodes.borrow();
        match nodes.iter().position(|n| !n.value.is_finite() || n.partials.iter().any(|p| !p.is_finite())) {
            None => Ok(()),
            Some(i) => Err(Error::numeric(
                nodes[i].op.name(),
                format!("tape node {i} evaluated to {}", nodes[i].value),
            )),
        }
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    fn unary(self, op: Op, value: f64, partial: f64) -> Var<'t> {
        self.tape.push(op, value, [self.index, 0], [partial, 0.0], 1)
    }

    fn binary(self, other: Var<'t>, op: Op, value: f64, da: f64, db: f64) -> Var<'t> {
        debug_assert!(std::ptr::eq(self.tape, other.tape), "variables from different tapes");
        self.tape.push(op, value, [self.index, other.index], [da, db], 2)
    }

    pub fn tanh(self) -> Var<'t> {
        let t = self.value.tanh();
        self.unary(Op::Tanh, t, 1.0 - t * t)
    }

    pub fn relu(self) -> Var<'t> {
        if self.value > 0.0 {
            self.unary(Op::Relu, self.value, 1.0)
        } else {
            self.unary(Op::Relu, 0.0, 0.0)
        }
    }

    pub fn ln(self) -> Var<'t> {
        self.unary(Op::Ln, self.value.ln(), 1.0 / self.value)
    }

    pub fn exp(self) -> Var<'t> {
        let e = self.value.exp();
        self.unary(Op::Exp, e, e)
    }

    pub fn square(self) -> Var<'t> {
        self.unary(Op::Square, self.value * self.value, 2.0 * self.value)
    }

    /// `ln(1 + e^x)`, evaluated without overflow.
    pub fn softplus(self) -> Var<'t> {
        let x = self.value;
        self.unary(Op::Softplus, softplus(x), logistic(x))
    }

    /// Clamps the value; the derivative is zero outside `[lo, hi]`.
    pub fn clamp(self, lo: f64, hi: f64) -> Var<'t> {
        let x = self.value;
        if x < lo {
            self.unary(Op::Clamp, lo, 0.0)
        } else if x > hi {
            self.unary(Op::Clamp, hi, 0.0)
        } else {
            self.unary(Op::Clamp, x, 1.0)
        }
    }
}

pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, Op::Add, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, Op::Sub, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, Op::Mul, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: Var<'t>) -> Var<'t> {
        let q = self.value / rhs.value;
        self.binary(rhs, Op::Div, q, 1.0 / rhs.value, -q / rhs.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.unary(Op::Neg, -self.value, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: f64) -> Var<'t> {
        self.unary(Op::Add, self.value + rhs, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: f64) -> Var<'t> {
        self.unary(Op::Sub, self.value - rhs, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: f64) -> Var<'t> {
        self.unary(Op::Mul, self.value * rhs, rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: f64) -> Var<'t> {
        self.unary(Op::Div, self.value / rhs, 1.0 / rhs)
    }
}

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::tape::{logistic, softplus, Var};

/// Arithmetic shared by plain `f64` evaluation and taped [`Var`] evaluation.
///
/// Losses and network forward passes are written once against this trait;
/// instantiating them with `f64` gives a fast value-only path, with [`Var`]
/// a differentiable one.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;
    /// A constant in the same evaluation context as `self`.
    fn lift(&self, c: f64) -> Self;
    fn tanh(self) -> Self;
    fn relu(self) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn square(self) -> Self;
    fn softplus(self) -> Self;
    fn clamp(self, lo: f64, hi: f64) -> Self;

    /// `ln σ(x)` for the logistic σ.
    fn log_sigmoid(self) -> Self {
        -(-self).softplus()
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn relu(self) -> Self {
        if self > 0.0 {
            self
        } else {
            0.0
        }
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn square(self) -> Self {
        self * self
    }
    fn softplus(self) -> Self {
        softplus(self)
    }
    fn clamp(self, lo: f64, hi: f64) -> Self {
        f64::clamp(self, lo, hi)
    }
}

impl<'t> Scalar for Var<'t> {
    fn value(&self) -> f64 {
        Var::value(self)
    }
    fn lift(&self, c: f64) -> Self {
        self.tape().constant(c)
    }
    fn tanh(self) -> Self {
        Var::tanh(self)
    }
    fn relu(self) -> Self {
        Var::relu(self)
    }
    fn ln(self) -> Self {
        Var::ln(self)
    }
    fn exp(self) -> Self {
        Var::exp(self)
    }
    fn square(self) -> Self {
        Var::square(self)
    }
    fn softplus(self) -> Self {
        Var::softplus(self)
    }
    fn clamp(self, lo: f64, hi: f64) -> Self {
        Var::clamp(self, lo, hi)
    }
}

/// Logistic function on plain values.
pub fn sigmoid(x: f64) -> f64 {
    logistic(x)
}

/// Sum of a nonempty sequence. Panics on an empty one.
pub fn sum<S: Scalar>(xs: impl IntoIterator<Item = S>) -> S {
    let mut it = xs.into_iter();
    let first = it.next().expect("sum of empty sequence");
    it.fold(first, |acc, x| acc + x)
}

pub fn mean<S: Scalar>(xs: &[S]) -> S {
    sum(xs.iter().copied()) / xs.len() as f64
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

/// `xᵀ M y` for a row-major `M`.
pub fn bilinear<S: Scalar>(x: &[S], m: &[[f64; 2]; 2], y: &[S]) -> S {
    let my0 = y[0] * m[0][0] + y[1] * m[0][1];
    let my1 = y[0] * m[1][0] + y[1] * m[1][1];
    x[0] * my0 + x[1] * my1
}

pub fn squared_norm<S: Scalar>(x: &[S]) -> S {
    sum(x.iter().map(|&v| v.square()))
}

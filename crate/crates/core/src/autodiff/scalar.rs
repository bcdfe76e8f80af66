use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{Dual, Jet};

/// Arithmetic shared by plain floats, jets and duals, so residuals and exact
/// solutions are written once.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn tanh(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn scale(self, s: f64) -> Self {
        self * Self::cst(s)
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl<const D: usize> Scalar for Jet<D> {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        Jet::sin(self)
    }
    fn cos(self) -> Self {
        Jet::cos(self)
    }
    fn exp(self) -> Self {
        Jet::exp(self)
    }
    fn tanh(self) -> Self {
        Jet::tanh(self)
    }
    fn sqrt(self) -> Self {
        Jet::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        Jet::powi(self, n)
    }
    fn scale(self, s: f64) -> Self {
        Jet::scale(self, s)
    }
}

/// One output field with its input derivatives, padded to three coordinates.
#[derive(Clone, Copy, Debug)]
pub struct FieldDerivs<T> {
    pub v: T,
    pub g: [T; 3],
    pub h: [[T; 3]; 3],
}

impl<T: Scalar> FieldDerivs<T> {
    pub fn constant(v: f64) -> Self {
        let z = T::cst(0.0);
        Self {
            v: T::cst(v),
            g: [z; 3],
            h: [[z; 3]; 3],
        }
    }
}

impl FieldDerivs<f64> {
    pub fn from_jet<const D: usize>(j: &Jet<D>) -> Self {
        let mut out = Self::constant(j.v);
        for i in 0..D {
            out.g[i] = j.g[i];
            for k in 0..D {
                out.h[i][k] = j.h[i][k];
            }
        }
        out
    }
}

impl FieldDerivs<Dual> {
    /// Lift an output jet into duals whose slots start at `offset`, one slot
    /// per jet component in the flat order of [`Jet::comp`].
    pub fn seeded<const D: usize>(j: &Jet<D>, offset: usize) -> Self {
        let mut out = Self::constant(0.0);
        out.v = Dual::variable(j.v, offset);
        for i in 0..D {
            out.g[i] = Dual::variable(j.g[i], offset + 1 + i);
            for k in 0..D {
                out.h[i][k] = Dual::variable(j.h[i][k], offset + 1 + D + i * D + k);
            }
        }
        out
    }
}

//! Forward dual numbers over the components of the network output jets.
//!
//! A residual such as `u_xx + u_yy + k^2 u - f` is a function of the output
//! jet components. Evaluating it on [`Dual`] values yields the residual and
//! its gradient with respect to every component in one pass, which is the
//! seed adjoint for the parameter tape.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Enough slots for three outputs over three input coordinates.
pub const DUAL_SLOTS: usize = 39;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: [f64; DUAL_SLOTS],
}

impl Dual {
    pub fn constant(v: f64) -> Self {
        Self {
            v,
            d: [0.0; DUAL_SLOTS],
        }
    }

    pub fn variable(v: f64, slot: usize) -> Self {
        let mut x = Self::constant(v);
        x.d[slot] = 1.0;
        x
    }

    #[inline]
    fn chain(self, d0: f64, d1: f64) -> Self {
        let mut out = Self::constant(d0);
        for (o, s) in out.d.iter_mut().zip(self.d.iter()) {
            *o = d1 * s;
        }
        out
    }

    pub fn scale(self, s: f64) -> Self {
        self.chain(self.v * s, s)
    }
}

impl Add for Dual {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.v += rhs.v;
        for (a, b) in self.d.iter_mut().zip(rhs.d.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Dual {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.v -= rhs.v;
        for (a, b) in self.d.iter_mut().zip(rhs.d.iter()) {
            *a -= b;
        }
        self
    }
}

impl Mul for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.v * rhs.v);
        for i in 0..DUAL_SLOTS {
            out.d[i] = self.d[i] * rhs.v + self.v * rhs.d[i];
        }
        out
    }
}

impl Div for Dual {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let r = 1.0 / rhs.v;
        self * rhs.chain(r, -r * r)
    }
}

impl Neg for Dual {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl super::Scalar for Dual {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        self.chain(t, 1.0 - t * t)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn powi(self, n: i32) -> Self {
        let (d0, d1, _, _) = super::powi_derivs(self.v, n);
        self.chain(d0, d1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Scalar;

    #[test]
    fn product_rule_on_two_slots() {
        let a = Dual::variable(3.0, 0);
        let b = Dual::variable(-2.0, 5);
        let c = a * b + a.powi(3);
        assert_eq!(c.v, -6.0 + 27.0);
        assert_eq!(c.d[0], -2.0 + 27.0);
        assert_eq!(c.d[5], 3.0);
    }

    #[test]
    fn quotient_rule() {
        let a = Dual::variable(1.0, 1);
        let b = Dual::variable(4.0, 2);
        let q = a / b;
        assert_eq!(q.v, 0.25);
        assert_eq!(q.d[1], 0.25);
        assert_eq!(q.d[2], -1.0 / 16.0);
    }
}

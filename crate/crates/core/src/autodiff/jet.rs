//! Second-order forward jets over a small number of input coordinates.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to `D` seeded input coordinates. The Hessian is stored as a full
//! `D x D` matrix; every operation writes both triangles with the same
//! formula, so symmetry holds exactly.
//!
//! Besides forward arithmetic this module provides the adjoint rules used by
//! the parameter tape: given the adjoint of an operation's output jet,
//! [`Jet::mul_adjoint`] and [`Jet::chain_adjoint`] return the adjoint of an
//! input jet.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use super::AutodiffError;

/// Truncated Taylor scalar: value, first and second input derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const D: usize> {
    pub v: f64,
    pub g: [f64; D],
    pub h: [[f64; D]; D],
}

/// Complex amplitude whose real and imaginary parts are jets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexJet<const D: usize> {
    pub re: Jet<D>,
    pub im: Jet<D>,
}

impl<const D: usize> Jet<D> {
    /// Number of scalar components (value, gradient, full Hessian).
    pub const NCOMP: usize = 1 + D + D * D;

    pub fn constant(v: f64) -> Self {
        Self {
            v,
            g: [0.0; D],
            h: [[0.0; D]; D],
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Seed variable `i`: gradient `e_i`, zero Hessian.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[i] = 1.0;
        j
    }

    /// Component `k` in the flat order `v, g[0..D], h[0][0], h[0][1], ...`.
    #[inline]
    pub fn comp(&self, k: usize) -> f64 {
        if k == 0 {
            self.v
        } else if k <= D {
            self.g[k - 1]
        } else {
            let r = k - 1 - D;
            self.h[r / D][r % D]
        }
    }

    #[inline]
    pub fn set_comp(&mut self, k: usize, x: f64) {
        if k == 0 {
            self.v = x;
        } else if k <= D {
            self.g[k - 1] = x;
        } else {
            let r = k - 1 - D;
            self.h[r / D][r % D] = x;
        }
    }

    pub fn scale(self, s: f64) -> Self {
        let mut out = self;
        out.v *= s;
        for i in 0..D {
            out.g[i] *= s;
            for j in 0..D {
                out.h[i][j] *= s;
            }
        }
        out
    }

    /// `self += s * other`, component-wise.
    #[inline]
    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        self.v += s * other.v;
        for i in 0..D {
            self.g[i] += s * other.g[i];
            for j in 0..D {
                self.h[i][j] += s * other.h[i][j];
            }
        }
    }

    /// Euclidean inner product over all components.
    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        let mut s = self.v * other.v;
        for i in 0..D {
            s += self.g[i] * other.g[i];
            for j in 0..D {
                s += self.h[i][j] * other.h[i][j];
            }
        }
        s
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.g.iter().all(|x| x.is_finite())
            && self.h.iter().flatten().all(|x| x.is_finite())
    }

    /// Apply a scalar function given its value `d0` and derivatives `d1`, `d2`
    /// at `self.v`.
    #[inline]
    pub fn chain(&self, d0: f64, d1: f64, d2: f64) -> Self {
        let mut out = Self::constant(d0);
        for i in 0..D {
            out.g[i] = d1 * self.g[i];
            for j in i..D {
                let x = d2 * self.g[i] * self.g[j] + d1 * self.h[i][j];
                out.h[i][j] = x;
                out.h[j][i] = x;
            }
        }
        out
    }

    /// Adjoint of [`Jet::chain`] with respect to its input, given the output
    /// adjoint. Needs the third derivative `d3` because `d2` depends on the
    /// input value.
    #[inline]
    pub fn chain_adjoint(&self, d1: f64, d2: f64, d3: f64, adj: &Self) -> Self {
        let mut out = Self::zero();
        let mut v = d1 * adj.v;
        for i in 0..D {
            v += d2 * adj.g[i] * self.g[i];
            let mut gk = d1 * adj.g[i];
            for j in 0..D {
                v += adj.h[i][j] * (d3 * self.g[i] * self.g[j] + d2 * self.h[i][j]);
                gk += d2 * (adj.h[i][j] + adj.h[j][i]) * self.g[j];
                out.h[i][j] = d1 * adj.h[i][j];
            }
            out.g[i] = gk;
        }
        out.v = v;
        out
    }

    /// Adjoint contribution to one factor of a product, given the output
    /// adjoint and the other factor. For `c = a * b`:
    /// `adj_a = Jet::mul_adjoint(adj_c, b)` and `adj_b = Jet::mul_adjoint(adj_c, a)`.
    #[inline]
    pub fn mul_adjoint(adj: &Self, other: &Self) -> Self {
        let mut out = Self::zero();
        let mut v = adj.v * other.v;
        for i in 0..D {
            v += adj.g[i] * other.g[i];
            let mut gk = adj.g[i] * other.v;
            for j in 0..D {
                v += adj.h[i][j] * other.h[i][j];
                gk += (adj.h[i][j] + adj.h[j][i]) * other.g[j];
                out.h[i][j] = adj.h[i][j] * other.v;
            }
            out.g[i] = gk;
        }
        out.v = v;
        out
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    /// Second derivative taken as `-2 t (1 - t^2)` from the forward value.
    pub fn tanh(self) -> Self {
        let (d0, d1, d2, _) = tanh_derivs(self.v);
        self.chain(d0, d1, d2)
    }

    pub fn powi(self, n: i32) -> Self {
        let (d0, d1, d2, _) = powi_derivs(self.v, n);
        self.chain(d0, d1, d2)
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    /// Division that reports a zero denominator instead of producing infinities.
    pub fn checked_div(self, rhs: Self) -> Result<Self, AutodiffError> {
        if rhs.v == 0.0 {
            return Err(AutodiffError::DivisionByZero);
        }
        Ok(self * rhs.recip())
    }
}

/// `tanh` and its first three derivatives, all from the forward value.
#[inline]
pub fn tanh_derivs(x: f64) -> (f64, f64, f64, f64) {
    let t = x.tanh();
    let s = 1.0 - t * t;
    (t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0))
}

#[inline]
pub fn powi_derivs(x: f64, n: i32) -> (f64, f64, f64, f64) {
    let nf = n as f64;
    let p = |k: i32| if n - k == 0 { 1.0 } else { x.powi(n - k) };
    (
        p(0),
        nf * p(1),
        nf * (nf - 1.0) * p(2),
        nf * (nf - 1.0) * (nf - 2.0) * p(3),
    )
}

impl<const D: usize> Add for Jet<D> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl<const D: usize> Sub for Jet<D> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl<const D: usize> AddAssign for Jet<D> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.add_scaled(&rhs, 1.0);
    }
}

impl<const D: usize> SubAssign for Jet<D> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        self.add_scaled(&rhs, -1.0);
    }
}

impl<const D: usize> Neg for Jet<D> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const D: usize> Mul for Jet<D> {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let a = self;
        let mut out = Self::constant(a.v * b.v);
        for i in 0..D {
            out.g[i] = a.g[i] * b.v + a.v * b.g[i];
            for j in i..D {
                let x = a.h[i][j] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[i][j];
                out.h[i][j] = x;
                out.h[j][i] = x;
            }
        }
        out
    }
}

impl<const D: usize> Div for Jet<D> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<const D: usize> Mul<f64> for Jet<D> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl<const D: usize> Add<f64> for Jet<D> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.v += rhs;
        self
    }
}

impl<const D: usize> ComplexJet<D> {
    pub fn new(re: Jet<D>, im: Jet<D>) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(Jet::zero(), Jet::zero())
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    /// `|z|^2` as a jet.
    pub fn norm_sqr(&self) -> Jet<D> {
        self.re * self.re + self.im * self.im
    }

    /// Multiply by a constant complex number.
    pub fn scale_c(&self, re: f64, im: f64) -> Self {
        let mut out_re = self.re.scale(re);
        out_re.add_scaled(&self.im, -im);
        let mut out_im = self.im.scale(re);
        out_im.add_scaled(&self.re, im);
        Self::new(out_re, out_im)
    }
}

impl<const D: usize> Add for ComplexJet<D> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<const D: usize> Sub for ComplexJet<D> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<const D: usize> Mul for ComplexJet<D> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

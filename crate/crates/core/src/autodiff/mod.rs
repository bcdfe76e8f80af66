//! Differentiation engine.
//!
//! Input derivatives (up to second order, 1 to 3 coordinates) travel forward
//! as [`Jet`]s. Parameter gradients are obtained by replaying a
//! [`ParamTape`] backward from the adjoint of the network output jets.
//! Residual expressions are differentiated with respect to output-jet
//! components by the [`Dual`] scalar, which produces the seed adjoint.

mod dual;
mod jet;
mod planes;
mod scalar;
mod tape;

pub use dual::{Dual, DUAL_SLOTS};
pub use jet::{powi_derivs, tanh_derivs, ComplexJet, Jet};
pub use planes::Planes;
pub use scalar::{FieldDerivs, Scalar};
pub use tape::{
    AddConst, Affine, ParamLeaf, ParamTape, Square, SumScaled, Tanh, TapeOp, Value,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("input dimension {0} outside 1..=3")]
    InputDimension(usize),
    #[error("input dimension {got} does not match jet width {expected}")]
    JetWidth { expected: usize, got: usize },
    #[error("division by a zero-valued denominator")]
    DivisionByZero,
    #[error("operation {op} expects {expected} arguments, got {got}")]
    Arity {
        op: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Seed one jet per input coordinate: value `coords[i]`, gradient `e_i`.
pub fn seed_inputs<const D: usize>(coords: &[f64]) -> Result<Vec<Jet<D>>, AutodiffError> {
    if coords.is_empty() || coords.len() > 3 {
        return Err(AutodiffError::InputDimension(coords.len()));
    }
    if coords.len() != D {
        return Err(AutodiffError::JetWidth {
            expected: D,
            got: coords.len(),
        });
    }
    Ok(coords
        .iter()
        .enumerate()
        .map(|(i, &c)| Jet::variable(c, i))
        .collect())
}

/// Elementary operations supported on jets, addressable by value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Sin,
    Cos,
    Exp,
    Tanh,
    Powi(i32),
}

impl ElementaryOp {
    pub fn arity(self) -> usize {
        match self {
            ElementaryOp::Add | ElementaryOp::Sub | ElementaryOp::Mul | ElementaryOp::Div => 2,
            _ => 1,
        }
    }

    pub fn apply<const D: usize>(self, args: &[Jet<D>]) -> Result<Jet<D>, AutodiffError> {
        if args.len() != self.arity() {
            return Err(AutodiffError::Arity {
                op: self.name(),
                expected: self.arity(),
                got: args.len(),
            });
        }
        let a = args[0];
        Ok(match self {
            ElementaryOp::Add => a + args[1],
            ElementaryOp::Sub => a - args[1],
            ElementaryOp::Mul => a * args[1],
            ElementaryOp::Div => a.checked_div(args[1])?,
            ElementaryOp::Neg => -a,
            ElementaryOp::Sin => a.sin(),
            ElementaryOp::Cos => a.cos(),
            ElementaryOp::Exp => a.exp(),
            ElementaryOp::Tanh => a.tanh(),
            ElementaryOp::Powi(n) => a.powi(n),
        })
    }

    /// Same operation on plain floats, used by finite-difference checks.
    pub fn apply_f64(self, args: &[f64]) -> f64 {
        let a = args[0];
        match self {
            ElementaryOp::Add => a + args[1],
            ElementaryOp::Sub => a - args[1],
            ElementaryOp::Mul => a * args[1],
            ElementaryOp::Div => a / args[1],
            ElementaryOp::Neg => -a,
            ElementaryOp::Sin => a.sin(),
            ElementaryOp::Cos => a.cos(),
            ElementaryOp::Exp => a.exp(),
            ElementaryOp::Tanh => a.tanh(),
            ElementaryOp::Powi(n) => a.powi(n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementaryOp::Add => "add",
            ElementaryOp::Sub => "sub",
            ElementaryOp::Mul => "mul",
            ElementaryOp::Div => "div",
            ElementaryOp::Neg => "neg",
            ElementaryOp::Sin => "sin",
            ElementaryOp::Cos => "cos",
            ElementaryOp::Exp => "exp",
            ElementaryOp::Tanh => "tanh",
            ElementaryOp::Powi(_) => "powi",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seed_single_coordinate() {
        let s = seed_inputs::<1>(&[0.3]).unwrap();
        assert_eq!(s[0].v, 0.3);
        assert_eq!(s[0].g, [1.0]);
        assert_eq!(s[0].h, [[0.0]]);
    }

    #[test]
    fn seed_second_coordinate() {
        let s = seed_inputs::<2>(&[1.0, 2.0]).unwrap();
        assert_eq!(s[1].v, 2.0);
        assert_eq!(s[1].g, [0.0, 1.0]);
        assert_eq!(s[1].h, [[0.0; 2]; 2]);
    }

    #[test]
    fn seed_rejects_bad_dimension() {
        assert_eq!(
            seed_inputs::<0>(&[]).unwrap_err(),
            AutodiffError::InputDimension(0)
        );
        assert!(seed_inputs::<3>(&[0.0; 4]).is_err());
        assert!(seed_inputs::<2>(&[0.0; 3]).is_err());
    }

    #[test]
    fn square_at_half() {
        let x = seed_inputs::<1>(&[0.5]).unwrap()[0];
        let y = x * x;
        // central differences of x^2 at 0.5: value 0.25, slope 1, curvature 2
        assert!((y.v - 0.25).abs() < 1e-15);
        assert!((y.g[0] - 1.0).abs() < 1e-15);
        assert!((y.h[0][0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tanh_at_origin() {
        let x = seed_inputs::<1>(&[0.0]).unwrap()[0];
        let y = ElementaryOp::Tanh.apply(&[x]).unwrap();
        assert_eq!((y.v, y.g[0], y.h[0][0]), (0.0, 1.0, 0.0));
    }

    #[test]
    fn sin_at_half_pi() {
        let x = seed_inputs::<1>(&[std::f64::consts::FRAC_PI_2]).unwrap()[0];
        let y = ElementaryOp::Sin.apply(&[x]).unwrap();
        assert!((y.v - 1.0).abs() < 1e-15);
        assert!(y.g[0].abs() < 1e-15);
        assert!((y.h[0][0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn mul_at_three() {
        let x = seed_inputs::<1>(&[3.0]).unwrap()[0];
        let y = ElementaryOp::Mul.apply(&[x, x]).unwrap();
        assert_eq!((y.v, y.g[0], y.h[0][0]), (9.0, 6.0, 2.0));
    }

    #[test]
    fn div_by_zero_is_domain_error() {
        let x = seed_inputs::<1>(&[3.0]).unwrap()[0];
        let r = ElementaryOp::Div.apply(&[x, Jet::constant(0.0)]);
        assert_eq!(r.unwrap_err(), AutodiffError::DivisionByZero);
    }

    #[test]
    fn arity_is_checked() {
        let x = Jet::<1>::constant(1.0);
        assert!(ElementaryOp::Add.apply(&[x]).is_err());
        assert!(ElementaryOp::Sin.apply(&[x, x]).is_err());
    }

    fn composite<const D: usize>(x: &[Jet<D>]) -> Jet<D> {
        let a = x[0] * x[D - 1].sin() + x[0].tanh().powi(3);
        let b = (x[D - 1] * 0.5).exp() + 2.0;
        a.checked_div(b).unwrap().cos()
    }

    proptest! {
        #[test]
        fn hessian_symmetric_for_composites(
            a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0
        ) {
            let x = seed_inputs::<3>(&[a, b, c]).unwrap();
            let f = composite(&x) * x[1] + x[2].sin() * x[0];
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(f.h[i][j], f.h[j][i]);
                }
            }
        }

        #[test]
        fn chain_adjoint_matches_directional_derivative(
            x in -1.5f64..1.5, dx in -1.0f64..1.0, w in prop::array::uniform7(-1.0f64..1.0)
        ) {
            // <adj, d tanh(a)> along a perturbation of the input jet equals
            // <chain_adjoint(adj), perturbation>.
            let mut a = Jet::<2>::zero();
            a.v = x; a.g = [0.3, -0.4]; a.h = [[0.2, 0.1], [0.1, -0.5]];
            let mut da = Jet::<2>::zero();
            for k in 0..Jet::<2>::NCOMP { da.set_comp(k, dx * (k as f64 + 1.0) / 7.0); }
            da.h[1][0] = da.h[0][1];
            let mut adj = Jet::<2>::zero();
            for (k, &wk) in w.iter().enumerate() { adj.set_comp(k, wk); }
            let eps = 1e-6;
            let mut ap = a; ap.add_scaled(&da, eps);
            let mut am = a; am.add_scaled(&da, -eps);
            let fd = (adj.dot(&ap.tanh()) - adj.dot(&am.tanh())) / (2.0 * eps);
            let (_, d1, d2, d3) = tanh_derivs(x);
            let an = a.chain_adjoint(d1, d2, d3, &adj).dot(&da);
            prop_assert!((fd - an).abs() < 1e-7 * (1.0 + an.abs()));
        }

        #[test]
        fn mul_adjoint_matches_directional_derivative(
            w in prop::array::uniform7(-1.0f64..1.0), p in prop::array::uniform7(-1.0f64..1.0)
        ) {
            let mut a = Jet::<2>::zero();
            let mut b = Jet::<2>::zero();
            let mut adj = Jet::<2>::zero();
            let mut da = Jet::<2>::zero();
            for k in 0..7 {
                a.set_comp(k, p[k]);
                b.set_comp(k, p[6 - k] * 0.7 + 0.1);
                adj.set_comp(k, w[k]);
                da.set_comp(k, w[6 - k]);
            }
            // jets produced by the engine always carry symmetric Hessians
            for j in [&mut a, &mut b, &mut da] {
                j.h[1][0] = j.h[0][1];
            }
            // the map a -> a*b is linear in a, so the directional derivative is exact
            let lhs = adj.dot(&(da * b));
            let rhs = Jet::mul_adjoint(&adj, &b).dot(&da);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}

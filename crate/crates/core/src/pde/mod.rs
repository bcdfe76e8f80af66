//! Benchmark problems: residual operators, boundary and initial terms, exact
//! solutions and source terms.
//!
//! Coordinates are `(x, y)` for Helmholtz, `(t, x)` for Wave and
//! Klein-Gordon, and `(t, x, y)` for Cavity and Convection-diffusion.

mod loss;
mod metrics;
mod sampler;
mod sobol;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use loss::{evaluate_loss, LossEval};
pub use metrics::{evaluation_grid, field_errors, predict, reference_values, relative_l2, FieldError, ReferenceGrid, GRID, TIME_SLICES};
pub use sampler::{sample_batch, BatchSampler, CollocationBatch, SamplingStrategy};
pub use sobol::Sobol;

use crate::autodiff::{FieldDerivs, Scalar};
use crate::nn::NnError;

pub const CAVITY_RHO: f64 = 1056.0;
pub const CAVITY_MU: f64 = 0.01;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("unknown problem {0:?}")]
    UnknownProblem(String),
    #[error("Sobol sequences support at most 3 dimensions, got {0}")]
    SobolDimension(usize),
    #[error("reference field has zero norm")]
    ZeroReference,
    #[error("prediction has {pred} values, reference has {reference}")]
    LengthMismatch { pred: usize, reference: usize },
    #[error("{0} has no closed-form solution; supply a reference grid")]
    MissingReference(ProblemKind),
    #[error("bad reference grid: {0}")]
    Reference(String),
    #[error("model width does not match {problem}: {detail}")]
    ModelShape { problem: ProblemKind, detail: String },
    #[error(transparent)]
    Model(#[from] NnError),
    #[error("CV state norm {0} fell below 0.5")]
    NormCollapse(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Helmholtz,
    Cavity,
    Wave,
    KleinGordon,
    ConvectionDiffusion,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Helmholtz,
        ProblemKind::Cavity,
        ProblemKind::Wave,
        ProblemKind::KleinGordon,
        ProblemKind::ConvectionDiffusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Helmholtz => "helmholtz",
            ProblemKind::Cavity => "cavity",
            ProblemKind::Wave => "wave",
            ProblemKind::KleinGordon => "klein-gordon",
            ProblemKind::ConvectionDiffusion => "convection-diffusion",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = PdeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| PdeError::UnknownProblem(s.to_string()))
    }
}

/// Where a role draws its points.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Interior,
    /// Union of faces `coord[axis] == value`, each picked with equal
    /// probability.
    Faces(Vec<(usize, f64)>),
}

/// A named point set shared by one or more loss terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Role {
    pub name: &'static str,
    pub region: Region,
    /// Whether any term on this role reads input derivatives.
    pub needs_derivatives: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Residual {
    /// Equation `k` of the governing system.
    Pde(usize),
    /// Every output field minus the exact solution.
    Exact,
    /// Selected fields minus constant targets.
    Values(Vec<(usize, f64)>),
    /// First derivative of field 0 along `axis`.
    Rate { axis: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub name: &'static str,
    pub weight: f64,
    pub role: usize,
    pub residual: Residual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdeProblem {
    pub kind: ProblemKind,
    pub d_in: usize,
    pub d_out: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub roles: Vec<Role>,
    pub terms: Vec<Term>,
    pub fields: Vec<&'static str>,
}

fn role(name: &'static str, region: Region, needs_derivatives: bool) -> Role {
    Role {
        name,
        region,
        needs_derivatives,
    }
}

fn term(name: &'static str, weight: f64, role: usize, residual: Residual) -> Term {
    Term {
        name,
        weight,
        role,
        residual,
    }
}

impl PdeProblem {
    pub fn new(kind: ProblemKind) -> Self {
        use Region::*;
        use Residual::*;
        match kind {
            ProblemKind::Helmholtz => Self {
                kind,
                d_in: 2,
                d_out: 1,
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
                roles: vec![
                    role("interior", Interior, true),
                    role(
                        "boundary",
                        Faces(vec![(0, -1.0), (0, 1.0), (1, -1.0), (1, 1.0)]),
                        false,
                    ),
                ],
                terms: vec![term("residual", 1.0, 0, Pde(0)), term("boundary", 10.0, 1, Exact)],
                fields: vec!["u"],
            },
            ProblemKind::Cavity => Self {
                kind,
                d_in: 3,
                d_out: 3,
                lo: vec![0.0, 0.0, 0.0],
                hi: vec![10.0, 1.0, 1.0],
                roles: vec![
                    role("interior", Interior, true),
                    role("lid", Faces(vec![(2, 1.0)]), false),
                    role("walls", Faces(vec![(1, 0.0), (1, 1.0), (2, 0.0)]), false),
                    role("initial", Faces(vec![(0, 0.0)]), false),
                ],
                terms: vec![
                    term("r_u", 0.1, 0, Pde(0)),
                    term("r_v", 0.1, 0, Pde(1)),
                    term("r_c", 0.1, 0, Pde(2)),
                    term("lid", 2.0, 1, Values(vec![(0, 1.0), (1, 0.0)])),
                    term("walls", 2.0, 2, Values(vec![(0, 0.0), (1, 0.0)])),
                    term("initial", 4.0, 3, Values(vec![(0, 0.0), (1, 0.0), (2, 0.0)])),
                ],
                fields: vec!["u", "v", "p"],
            },
            ProblemKind::Wave | ProblemKind::KleinGordon => {
                let (w_pde, w_rate) = if kind == ProblemKind::Wave { (0.1, 0.1) } else { (1.0, 1.0) };
                Self {
                    kind,
                    d_in: 2,
                    d_out: 1,
                    lo: vec![0.0, 0.0],
                    hi: vec![1.0, 1.0],
                    roles: vec![
                        role("interior", Interior, true),
                        role("bc_left", Faces(vec![(1, 0.0)]), false),
                        role("bc_right", Faces(vec![(1, 1.0)]), false),
                        role("initial", Faces(vec![(0, 0.0)]), true),
                    ],
                    terms: vec![
                        term("residual", w_pde, 0, Pde(0)),
                        term("bc_left", 10.0, 1, Exact),
                        term("bc_right", 10.0, 2, Exact),
                        term("initial", 10.0, 3, Exact),
                        term("initial_rate", w_rate, 3, Rate { axis: 0 }),
                    ],
                    fields: vec!["u"],
                }
            }
            ProblemKind::ConvectionDiffusion => Self {
                kind,
                d_in: 3,
                d_out: 1,
                lo: vec![0.0, 0.0, 0.0],
                hi: vec![1.0, 1.0, 1.0],
                roles: vec![
                    role("interior", Interior, true),
                    role("bc_x0", Faces(vec![(1, 0.0)]), false),
                    role("bc_x1", Faces(vec![(1, 1.0)]), false),
                    role("initial", Faces(vec![(0, 0.0)]), false),
                ],
                terms: vec![
                    term("residual", 1.0, 0, Pde(0)),
                    term("bc_x0", 10.0, 1, Exact),
                    term("bc_x1", 10.0, 2, Exact),
                    term("initial", 10.0, 3, Exact),
                ],
                fields: vec!["u"],
            },
        }
    }

    pub fn has_exact(&self) -> bool {
        self.kind != ProblemKind::Cavity
    }

    /// Closed-form solution; `None` for Cavity.
    pub fn exact<T: Scalar>(&self, x: &[T]) -> Option<Vec<T>> {
        let pi = |k: f64, a: T| a.scale(k * PI);
        Some(match self.kind {
            ProblemKind::Helmholtz => vec![pi(1.0, x[0]).sin() * pi(4.0, x[1]).sin()],
            ProblemKind::Cavity => return None,
            ProblemKind::Wave => {
                let (t, s) = (x[0], x[1]);
                vec![
                    pi(1.0, s).sin() * pi(2.0, t).cos()
                        + (pi(4.0, s).sin() * pi(8.0, t).cos()).scale(0.5),
                ]
            }
            ProblemKind::KleinGordon => {
                let (t, s) = (x[0], x[1]);
                vec![s * pi(5.0, t).cos() + (t * s).powi(3)]
            }
            ProblemKind::ConvectionDiffusion => {
                let (t, a, b) = (x[0], x[1] - T::cst(0.5), x[2] - T::cst(0.5));
                vec![((a * a + b * b).scale(-100.0) - t).exp()]
            }
        })
    }

    pub fn exact_f64(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.exact::<f64>(x)
    }

    /// Forcing term of the governing equation; zero where the equation is
    /// homogeneous.
    pub fn source(&self, x: &[f64]) -> f64 {
        match self.kind {
            // u_xx + u_yy + k^2 u = f with k = 1
            ProblemKind::Helmholtz => (1.0 - 17.0 * PI * PI) * self.exact_f64(x).unwrap()[0],
            ProblemKind::KleinGordon => {
                let (t, s) = (x[0], x[1]);
                let c = (5.0 * PI * t).cos();
                s * (-25.0 * PI * PI * c - 6.0 * t.powi(3))
                    + 6.0 * t * s.powi(3)
                    + s.powi(3) * (c + t.powi(3) * s * s).powi(3)
            }
            ProblemKind::ConvectionDiffusion => {
                let (a, b) = (x[1] - 0.5, x[2] - 0.5);
                self.exact_f64(x).unwrap()[0]
                    * (3.0 - 200.0 * a - 200.0 * b - 400.0 * (a * a + b * b))
            }
            ProblemKind::Cavity | ProblemKind::Wave => 0.0,
        }
    }

    /// Equation `eq` of the governing system at `x`.
    pub fn pde_residual<T: Scalar>(&self, eq: usize, x: &[f64], f: &[FieldDerivs<T>]) -> T {
        let src = T::cst(self.source(x));
        match self.kind {
            ProblemKind::Helmholtz => {
                let u = &f[0];
                u.h[0][0] + u.h[1][1] + u.v - src
            }
            ProblemKind::Cavity => {
                let (u, v, p) = (&f[0], &f[1], &f[2]);
                let momentum = |w: &FieldDerivs<T>, px: T| {
                    w.g[0] + u.v * w.g[1] + v.v * w.g[2] + px.scale(1.0 / CAVITY_RHO)
                        - (w.h[1][1] + w.h[2][2]).scale(CAVITY_MU)
                };
                match eq {
                    0 => momentum(u, p.g[1]),
                    1 => momentum(v, p.g[2]),
                    _ => u.g[1] + v.g[2],
                }
            }
            ProblemKind::Wave => {
                let u = &f[0];
                u.h[0][0] - u.h[1][1].scale(4.0)
            }
            ProblemKind::KleinGordon => {
                let u = &f[0];
                u.h[0][0] - u.h[1][1] + u.v.powi(3) - src
            }
            ProblemKind::ConvectionDiffusion => {
                let u = &f[0];
                u.g[0] + u.g[1] + u.g[2] - (u.h[1][1] + u.h[2][2]).scale(0.01) - src
            }
        }
    }

    /// Residual components of one term at one point.
    pub fn residual<T: Scalar>(&self, term: &Term, x: &[f64], f: &[FieldDerivs<T>]) -> Vec<T> {
        match &term.residual {
            Residual::Pde(eq) => vec![self.pde_residual(*eq, x, f)],
            Residual::Exact => {
                let target = self
                    .exact_f64(x)
                    .expect("exact-solution terms only exist on closed-form problems");
                f.iter().zip(target).map(|(w, t)| w.v - T::cst(t)).collect()
            }
            Residual::Values(targets) => targets
                .iter()
                .map(|&(k, t)| f[k].v - T::cst(t))
                .collect(),
            Residual::Rate { axis } => vec![f[0].g[*axis]],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{seed_inputs, Jet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exact_fields<const D: usize>(p: &PdeProblem, x: &[f64]) -> Vec<FieldDerivs<f64>> {
        let seeded = seed_inputs::<D>(x).unwrap();
        p.exact(&seeded)
            .unwrap()
            .iter()
            .map(FieldDerivs::from_jet)
            .collect()
    }

    fn residual_mse(p: &PdeProblem, n: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut acc = 0.0;
        for _ in 0..n {
            let x: Vec<f64> = (0..p.d_in).map(|i| rng.random_range(p.lo[i]..p.hi[i])).collect();
            let f = match p.d_in {
                2 => exact_fields::<2>(p, &x),
                _ => exact_fields::<3>(p, &x),
            };
            acc += p.pde_residual(0, &x, &f).powi(2);
        }
        acc / n as f64
    }

    #[test]
    fn exact_solutions_satisfy_their_equations() {
        for kind in [
            ProblemKind::Helmholtz,
            ProblemKind::Wave,
            ProblemKind::KleinGordon,
            ProblemKind::ConvectionDiffusion,
        ] {
            let mse = residual_mse(&PdeProblem::new(kind), 1000);
            assert!(mse < 1e-10, "{kind}: {mse}");
        }
    }

    #[test]
    fn closed_form_values() {
        let h = PdeProblem::new(ProblemKind::Helmholtz);
        assert!((h.exact_f64(&[0.5, 0.125]).unwrap()[0] - 1.0).abs() < 1e-15);
        let x = [0.3, -0.7];
        let u = h.exact_f64(&x).unwrap()[0];
        assert!((h.source(&x) - (1.0 - 17.0 * PI * PI) * u).abs() < 1e-12);

        let w = PdeProblem::new(ProblemKind::Wave);
        assert!((w.exact_f64(&[0.0, 0.5]).unwrap()[0] - 1.0).abs() < 1e-15);
        for t in [0.0, 0.3, 0.9] {
            assert!(w.exact_f64(&[t, 0.0]).unwrap()[0].abs() < 1e-15);
        }

        let kg = PdeProblem::new(ProblemKind::KleinGordon);
        assert_eq!(kg.exact_f64(&[0.0, 0.37]).unwrap()[0], 0.37);
        assert!((kg.source(&[0.0, 1.0]) - (1.0 - 25.0 * PI * PI)).abs() < 1e-12);

        let cd = PdeProblem::new(ProblemKind::ConvectionDiffusion);
        assert_eq!(cd.exact_f64(&[0.0, 0.5, 0.5]).unwrap()[0], 1.0);
        let x = [0.4, 0.5, 0.5];
        assert!((cd.source(&x) - 3.0 * cd.exact_f64(&x).unwrap()[0]).abs() < 1e-15);
        assert!(PdeProblem::new(ProblemKind::Cavity).exact_f64(&x).is_none());
    }

    #[test]
    fn cavity_trivial_states() {
        let c = PdeProblem::new(ProblemKind::Cavity);
        let zero = [FieldDerivs::<f64>::constant(0.0), FieldDerivs::constant(0.0), FieldDerivs::constant(3.0)];
        let x = [1.0, 0.4, 0.6];
        for eq in 0..3 {
            assert_eq!(c.pde_residual(eq, &x, &zero), 0.0);
        }
        let lid = &c.terms[3];
        let r = c.residual(lid, &[0.0, 0.3, 1.0], &[FieldDerivs::<f64>::constant(0.0); 3]);
        let mse: f64 = r.iter().map(|v| v * v).sum();
        assert_eq!(mse, 1.0);
    }

    #[test]
    fn cavity_pressure_gradient_uses_inverse_density() {
        let c = PdeProblem::new(ProblemKind::Cavity);
        let mut p = FieldDerivs::<f64>::constant(0.0);
        p.g[1] = 1056.0;
        let f = [FieldDerivs::constant(0.0), FieldDerivs::constant(0.0), p];
        assert_eq!(c.pde_residual(0, &[0.0, 0.5, 0.5], &f), 1.0);
    }

    #[test]
    fn exact_solution_zeroes_every_wave_term() {
        let w = PdeProblem::new(ProblemKind::Wave);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in &w.terms {
            let mut x: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..1.0)).collect();
            if let Region::Faces(faces) = &w.roles[t.role].region {
                x[faces[0].0] = faces[0].1;
            }
            let f = exact_fields::<2>(&w, &x);
            for r in w.residual(t, &x, &f) {
                assert!(r.abs() < 1e-8, "{}: {r}", t.name);
            }
        }
    }

    #[test]
    fn jets_of_exact_solutions_agree_with_plain_values() {
        let p = PdeProblem::new(ProblemKind::KleinGordon);
        let j = p.exact(&seed_inputs::<2>(&[0.2, 0.8]).unwrap()).unwrap()[0];
        let v: Jet<2> = j;
        assert_eq!(v.v, p.exact_f64(&[0.2, 0.8]).unwrap()[0]);
    }

    #[test]
    fn names_roundtrip() {
        for k in ProblemKind::ALL {
            assert_eq!(k.name().parse::<ProblemKind>().unwrap(), k);
        }
        assert!("poisson".parse::<ProblemKind>().is_err());
    }
}

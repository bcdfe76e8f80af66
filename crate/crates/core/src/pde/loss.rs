//! Weighted composite loss and its parameter gradient.
//!
//! Each point runs one taped forward pass. Residuals are then evaluated in
//! dual numbers over the output-jet components, which turns
//! `w * (2/N) * r * dr/d(jet)` into the output adjoint fed to the tape.

use rayon::prelude::*;

use super::{CollocationBatch, PdeError, PdeProblem};
use crate::autodiff::{Dual, FieldDerivs, Jet, ParamTape, Value};
use crate::nn::{HybridModel, PreparedCore};

/// Points per parallel work item; partial sums are reduced in chunk order so
/// results do not depend on thread count.
const CHUNK: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct LossEval {
    /// Sum of `weight * mse` over all terms.
    pub total: f64,
    /// Unweighted mean squared residual per term, in problem order.
    pub terms: Vec<(&'static str, f64)>,
    pub grad: Option<Vec<f64>>,
    /// Smallest squared norm of the CV state seen in the batch.
    pub min_cv_norm: Option<f64>,
}

struct Ctx<'a> {
    problem: &'a PdeProblem,
    model: &'a HybridModel,
    prepared: &'a PreparedCore,
    params: &'a [f64],
    with_grad: bool,
}

struct Partial {
    sums: Vec<f64>,
    grad: Vec<f64>,
    min_norm: Option<f64>,
}

impl Partial {
    fn new(n_terms: usize, n_params: usize) -> Self {
        Self {
            sums: vec![0.0; n_terms],
            grad: vec![0.0; n_params],
            min_norm: None,
        }
    }

    fn merge(&mut self, other: Partial) {
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            *a += b;
        }
        for (a, b) in self.grad.iter_mut().zip(other.grad) {
            *a += b;
        }
        self.min_norm = match (self.min_norm, other.min_norm) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

fn seed<const D: usize>(x: &[f64]) -> Vec<Jet<D>> {
    x.iter()
        .enumerate()
        .map(|(i, &c)| if D == 0 { Jet::constant(c) } else { Jet::variable(c, i) })
        .collect()
}

fn point<const D: usize>(
    ctx: &Ctx,
    terms: &[usize],
    x: &[f64],
    n: f64,
    acc: &mut Partial,
) -> Result<(), PdeError> {
    let p = ctx.problem;
    let mut tape = ParamTape::<D>::new();
    let out = ctx.model.forward(
        ctx.prepared,
        ctx.params,
        seed::<D>(x),
        ctx.with_grad.then_some(&mut tape),
    )?;
    if let Some(norm) = out.cv_norm {
        acc.min_norm = Some(acc.min_norm.map_or(norm, |m: f64| m.min(norm)));
    }
    if !ctx.with_grad {
        let fields: Vec<FieldDerivs<f64>> = out.outputs.iter().map(FieldDerivs::from_jet).collect();
        for &t in terms {
            for r in p.residual(&p.terms[t], x, &fields) {
                acc.sums[t] += r * r;
            }
        }
        return Ok(());
    }
    let nc = Jet::<D>::NCOMP;
    let fields: Vec<FieldDerivs<Dual>> = out
        .outputs
        .iter()
        .enumerate()
        .map(|(k, j)| FieldDerivs::seeded(j, k * nc))
        .collect();
    let mut adj = vec![Jet::<D>::zero(); out.outputs.len()];
    for &t in terms {
        let term = &p.terms[t];
        for r in p.residual(term, x, &fields) {
            acc.sums[t] += r.v * r.v;
            let c = term.weight * 2.0 / n * r.v;
            for (k, a) in adj.iter_mut().enumerate() {
                for comp in 0..nc {
                    let d = r.d[k * nc + comp];
                    if d != 0.0 {
                        a.set_comp(comp, a.comp(comp) + c * d);
                    }
                }
            }
        }
    }
    tape.backward(ctx.params, Value::Real(adj), &mut acc.grad);
    Ok(())
}

fn role_pass<const D: usize>(ctx: &Ctx, terms: &[usize], pts: &[Vec<f64>]) -> Result<Partial, PdeError> {
    let n_terms = ctx.problem.terms.len();
    let n_params = if ctx.with_grad { ctx.params.len() } else { 0 };
    let n = pts.len() as f64;
    let partials: Vec<Partial> = pts
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = Partial::new(n_terms, n_params);
            for x in chunk {
                point::<D>(ctx, terms, x, n, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_, PdeError>>()?;
    let mut total = Partial::new(n_terms, n_params);
    for part in partials {
        total.merge(part);
    }
    Ok(total)
}

/// Composite loss of `model` on `batch`, with the parameter gradient when
/// `with_grad` is set.
pub fn evaluate_loss(
    problem: &PdeProblem,
    model: &HybridModel,
    params: &[f64],
    batch: &CollocationBatch,
    with_grad: bool,
) -> Result<LossEval, PdeError> {
    if model.spec.n_in != problem.d_in || model.spec.n_out != problem.d_out {
        return Err(PdeError::ModelShape {
            problem: problem.kind,
            detail: format!(
                "model maps {} -> {}, problem needs {} -> {}",
                model.spec.n_in, model.spec.n_out, problem.d_in, problem.d_out
            ),
        });
    }
    if batch.roles.len() != problem.roles.len() {
        return Err(PdeError::ModelShape {
            problem: problem.kind,
            detail: format!("batch has {} roles, expected {}", batch.roles.len(), problem.roles.len()),
        });
    }
    let prepared = model.prepare(params)?;
    let ctx = Ctx {
        problem,
        model,
        prepared: &prepared,
        params,
        with_grad,
    };
    let n_params = if with_grad { params.len() } else { 0 };
    let mut acc = Partial::new(problem.terms.len(), n_params);
    let mut counts = vec![0usize; problem.terms.len()];
    for (r, role) in problem.roles.iter().enumerate() {
        let terms: Vec<usize> = (0..problem.terms.len())
            .filter(|&t| problem.terms[t].role == r)
            .collect();
        let pts = &batch.roles[r];
        if terms.is_empty() || pts.is_empty() {
            continue;
        }
        for &t in &terms {
            counts[t] = pts.len();
        }
        let part = match (role.needs_derivatives, problem.d_in) {
            (false, _) => role_pass::<0>(&ctx, &terms, pts)?,
            (true, 1) => role_pass::<1>(&ctx, &terms, pts)?,
            (true, 2) => role_pass::<2>(&ctx, &terms, pts)?,
            (true, _) => role_pass::<3>(&ctx, &terms, pts)?,
        };
        acc.merge(part);
    }
    let terms: Vec<(&'static str, f64)> = problem
        .terms
        .iter()
        .zip(&acc.sums)
        .zip(&counts)
        .map(|((t, &s), &c)| (t.name, if c == 0 { 0.0 } else { s / c as f64 }))
        .collect();
    let total = problem
        .terms
        .iter()
        .zip(&terms)
        .map(|(t, (_, mse))| t.weight * mse)
        .sum();
    Ok(LossEval {
        total,
        terms,
        grad: with_grad.then_some(acc.grad),
        min_cv_norm: acc.min_norm,
    })
}

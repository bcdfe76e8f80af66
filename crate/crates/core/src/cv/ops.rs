//! Recorded CV operations for parameter-gradient replay.

use std::sync::Arc;

use super::fock::{BsBlock, GateMats};
use super::kernels::{
    apply_bs, apply_diag, apply_mode, bs_sensitivity, contract, diag_sensitivity, mode_correlation,
    FockShape,
};
use super::{CvError, Measurement};
use crate::autodiff::{ComplexJet, Jet, ParamTape, Planes, TapeOp, Value};

/// One gate with its matrices evaluated for the current parameters.
#[derive(Clone, Debug)]
pub enum CvStep {
    /// Single-mode matrix; `params[k]` is the flat index of argument `k`.
    Mode {
        mode: usize,
        mats: Arc<GateMats>,
        params: Vec<Option<usize>>,
    },
    Beamsplitter {
        a: usize,
        b: usize,
        blocks: Arc<Vec<BsBlock>>,
        theta: Option<usize>,
        phi: Option<usize>,
    },
    /// `exp(i kappa w)` with integer-valued weights over the basis.
    Diagonal {
        weights: Arc<Vec<f64>>,
        kappa: f64,
        param: Option<usize>,
    },
}

impl CvStep {
    pub fn apply(&self, state: &Planes, shape: FockShape) -> Planes {
        match self {
            CvStep::Mode { mode, mats, .. } => apply_mode(state, shape, *mode, &mats.m, false),
            CvStep::Beamsplitter { a, b, blocks, .. } => apply_bs(state, shape, *a, *b, blocks, false),
            CvStep::Diagonal { weights, kappa, .. } => apply_diag(state, weights, *kappa, false),
        }
    }

    pub fn forward<const D: usize>(
        &self,
        state: Planes,
        shape: FockShape,
        tape: Option<&mut ParamTape<D>>,
    ) -> Planes {
        let out = self.apply(&state, shape);
        if let Some(t) = tape {
            // diagonal sensitivities use the output, the rest use the input
            let saved = if matches!(self, CvStep::Diagonal { .. }) {
                out.clone()
            } else {
                state
            };
            t.push(Box::new(StepOp {
                step: self.clone(),
                shape,
                saved,
            }));
        }
        out
    }
}

struct StepOp {
    step: CvStep,
    shape: FockShape,
    saved: Planes,
}

impl<const D: usize> TapeOp<D> for StepOp {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, grad: &mut [f64]) -> Value<D> {
        let adj = adj_out.into_state();
        let shape = self.shape;
        let adj_in = match &self.step {
            CvStep::Mode { mode, mats, params } => {
                if params.iter().any(Option::is_some) {
                    let corr = mode_correlation(&self.saved, &adj, shape, *mode);
                    for (p, dm) in params.iter().zip(&mats.d) {
                        if let Some(p) = p {
                            grad[*p] += contract(dm, &corr);
                        }
                    }
                }
                apply_mode(&adj, shape, *mode, &mats.m, true)
            }
            CvStep::Beamsplitter {
                a,
                b,
                blocks,
                theta,
                phi,
            } => {
                if theta.is_some() || phi.is_some() {
                    let (gt, gp) = bs_sensitivity(&self.saved, &adj, shape, *a, *b, blocks);
                    if let Some(p) = theta {
                        grad[*p] += gt;
                    }
                    if let Some(p) = phi {
                        grad[*p] += gp;
                    }
                }
                apply_bs(&adj, shape, *a, *b, blocks, true)
            }
            CvStep::Diagonal {
                weights,
                kappa,
                param,
            } => {
                if let Some(p) = param {
                    grad[*p] += diag_sensitivity(&self.saved, &adj, weights);
                }
                apply_diag(&adj, weights, *kappa, true)
            }
        };
        Value::State(adj_in)
    }
}

/// Truncated coherent amplitudes `f_n(a) = exp(-a^2/2) a^n / sqrt(n!)` and
/// their first three derivatives in `a`, for `n < c`.
pub fn coherent_derivs(a: f64, c: usize) -> [Vec<f64>; 4] {
    let len = c + 3;
    let mut f = vec![0.0; len];
    f[0] = (-0.5 * a * a).exp();
    for n in 1..len {
        f[n] = a / (n as f64).sqrt() * f[n - 1];
    }
    // d/da f = (a^dag - a) f
    let g = |v: &[f64]| -> Vec<f64> {
        (0..v.len() - 1)
            .map(|n| {
                let down = if n > 0 { (n as f64).sqrt() * v[n - 1] } else { 0.0 };
                down - ((n + 1) as f64).sqrt() * v[n + 1]
            })
            .collect()
    };
    let f1 = g(&f);
    let f2 = g(&f1);
    let f3 = g(&f2);
    [
        f[..c].to_vec(),
        f1[..c].to_vec(),
        f2[..c].to_vec(),
        f3[..c].to_vec(),
    ]
}

pub struct EncodeOp<const D: usize> {
    features: Vec<Jet<D>>,
    shape: FockShape,
}

impl<const D: usize> EncodeOp<D> {
    /// Product of coherent states `D(features[k], 0)|0>` over modes.
    pub fn forward(
        features: Vec<Jet<D>>,
        shape: FockShape,
        tape: Option<&mut ParamTape<D>>,
    ) -> Result<Planes, CvError> {
        if features.len() != shape.modes {
            return Err(CvError::FeatureCount {
                expected: shape.modes,
                got: features.len(),
            });
        }
        let amps = mode_amplitudes(&features, shape.cutoff);
        let mut planes = Planes::zeros(Jet::<D>::NCOMP, shape.dim());
        for b in 0..shape.dim() {
            let mut p = Jet::constant(1.0);
            for (k, a) in amps.iter().enumerate() {
                p = p * a[shape.digit(b, k)];
            }
            planes.set(b, &ComplexJet::new(p, Jet::zero()));
        }
        if let Some(t) = tape {
            t.push(Box::new(EncodeOp { features, shape }));
        }
        Ok(planes)
    }
}

fn mode_amplitudes<const D: usize>(features: &[Jet<D>], c: usize) -> Vec<Vec<Jet<D>>> {
    features
        .iter()
        .map(|a| {
            let [f, f1, f2, _] = coherent_derivs(a.v, c);
            (0..c).map(|n| a.chain(f[n], f1[n], f2[n])).collect()
        })
        .collect()
}

impl<const D: usize> TapeOp<D> for EncodeOp<D> {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, _grad: &mut [f64]) -> Value<D> {
        let adj = adj_out.into_state();
        let shape = self.shape;
        let c = shape.cutoff;
        let amps = mode_amplitudes(&self.features, c);
        let mut adj_amps = vec![vec![Jet::<D>::zero(); c]; shape.modes];
        for b in 0..shape.dim() {
            let a: ComplexJet<D> = adj.get(b);
            for k in 0..shape.modes {
                let mut others = Jet::constant(1.0);
                for (j, amp) in amps.iter().enumerate() {
                    if j != k {
                        others = others * amp[shape.digit(b, j)];
                    }
                }
                adj_amps[k][shape.digit(b, k)] += Jet::mul_adjoint(&a.re, &others);
            }
        }
        let out = self
            .features
            .iter()
            .zip(&adj_amps)
            .map(|(x, adj_k)| {
                let [_, f1, f2, f3] = coherent_derivs(x.v, c);
                let mut acc = Jet::zero();
                for n in 0..c {
                    acc += x.chain_adjoint(f1[n], f2[n], f3[n], &adj_k[n]);
                }
                acc
            })
            .collect();
        Value::Real(out)
    }
}

pub struct MeasureOp {
    input: Planes,
    shape: FockShape,
    kind: Measurement,
}

/// Per-mode sums whose ratio to the norm gives the expectation values.
fn moment_sums<const D: usize>(
    state: &Planes,
    shape: FockShape,
    kind: Measurement,
) -> (Vec<Jet<D>>, Jet<D>) {
    let mut sums = vec![Jet::<D>::zero(); shape.modes];
    let mut norm = Jet::<D>::zero();
    let amps: Vec<ComplexJet<D>> = (0..shape.dim()).map(|b| state.get(b)).collect();
    for (b, z) in amps.iter().enumerate() {
        let p = z.norm_sqr();
        norm += p;
        for (k, s) in sums.iter_mut().enumerate() {
            let n = shape.digit(b, k);
            match kind {
                Measurement::Number => s.add_scaled(&p, n as f64),
                Measurement::Quadrature => {
                    if n + 1 < shape.cutoff {
                        let w = amps[b + shape.stride(k)];
                        let re = z.re * w.re + z.im * w.im;
                        s.add_scaled(&re, 2.0 * ((n + 1) as f64).sqrt());
                    }
                }
            }
        }
    }
    (sums, norm)
}

impl MeasureOp {
    /// Normalized per-mode expectations and the squared norm of the value
    /// plane.
    pub fn forward<const D: usize>(
        state: Planes,
        shape: FockShape,
        kind: Measurement,
        tape: Option<&mut ParamTape<D>>,
    ) -> Result<(Vec<Jet<D>>, f64), CvError> {
        let (sums, norm) = moment_sums::<D>(&state, shape, kind);
        if norm.v <= 0.0 || !norm.v.is_finite() {
            return Err(CvError::ZeroNorm);
        }
        let inv = norm.recip();
        let out = sums.iter().map(|s| *s * inv).collect();
        if let Some(t) = tape {
            t.push(Box::new(MeasureOp {
                input: state,
                shape,
                kind,
            }));
        }
        Ok((out, norm.v))
    }
}

impl<const D: usize> TapeOp<D> for MeasureOp {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, _grad: &mut [f64]) -> Value<D> {
        let adj = adj_out.into_real();
        let shape = self.shape;
        let (sums, norm) = moment_sums::<D>(&self.input, shape, self.kind);
        let inv = norm.recip();
        let mut adj_inv = Jet::<D>::zero();
        let adj_sums: Vec<Jet<D>> = adj
            .iter()
            .zip(&sums)
            .map(|(a, s)| {
                adj_inv += Jet::mul_adjoint(a, s);
                Jet::mul_adjoint(a, &inv)
            })
            .collect();
        let r = 1.0 / norm.v;
        let adj_norm = norm.chain_adjoint(-r * r, 2.0 * r * r * r, -6.0 * r * r * r * r, &adj_inv);
        let amps: Vec<ComplexJet<D>> = (0..shape.dim()).map(|b| self.input.get(b)).collect();
        let mut out: Vec<ComplexJet<D>> = vec![ComplexJet::zero(); shape.dim()];
        for (b, z) in amps.iter().enumerate() {
            // weight on |z|^2 from the norm and, for number readout, the sums
            let mut wp = adj_norm;
            for (k, adj_s) in adj_sums.iter().enumerate() {
                let n = shape.digit(b, k);
                match self.kind {
                    Measurement::Number => wp.add_scaled(adj_s, n as f64),
                    Measurement::Quadrature => {
                        if n + 1 < shape.cutoff {
                            let bb = b + shape.stride(k);
                            let w = amps[bb];
                            let s = 2.0 * ((n + 1) as f64).sqrt();
                            out[b].re.add_scaled(&Jet::mul_adjoint(adj_s, &w.re), s);
                            out[b].im.add_scaled(&Jet::mul_adjoint(adj_s, &w.im), s);
                            out[bb].re.add_scaled(&Jet::mul_adjoint(adj_s, &z.re), s);
                            out[bb].im.add_scaled(&Jet::mul_adjoint(adj_s, &z.im), s);
                        }
                    }
                }
            }
            out[b].re.add_scaled(&Jet::mul_adjoint(&wp, &z.re), 2.0);
            out[b].im.add_scaled(&Jet::mul_adjoint(&wp, &z.im), 2.0);
        }
        let mut planes = Planes::zeros(self.input.ncomp, self.input.dim);
        for (b, z) in out.iter().enumerate() {
            planes.set(b, z);
        }
        Value::State(planes)
    }
}

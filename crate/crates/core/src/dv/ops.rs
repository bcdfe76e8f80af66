//! Recorded DV operations for parameter-gradient replay.

use super::state::{
    amplitude_norm, apply_block, bit_mask, block_sensitivity, dagger, minus_i_power,
    rsqrt_derivs, Mat2, QuantumStateDv,
};
use super::DvError;
use crate::autodiff::{ComplexJet, Jet, ParamTape, Planes, TapeOp, Value};

fn record<const D: usize>(tape: Option<&mut ParamTape<D>>, op: impl TapeOp<D> + 'static) {
    if let Some(t) = tape {
        t.push(Box::new(op));
    }
}

pub struct AngleEmbedOp<const D: usize> {
    features: Vec<Jet<D>>,
}

impl<const D: usize> AngleEmbedOp<D> {
    pub fn forward(
        features: Vec<Jet<D>>,
        n_qubits: usize,
        tape: Option<&mut ParamTape<D>>,
    ) -> Result<Planes, DvError> {
        let s = QuantumStateDv::angle_embed(&features, n_qubits)?;
        record(tape, AngleEmbedOp { features });
        Ok(s.planes)
    }
}

impl<const D: usize> TapeOp<D> for AngleEmbedOp<D> {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, _grad: &mut [f64]) -> Value<D> {
        let adj = adj_out.into_state();
        let n = self.features.len();
        let half: Vec<(Jet<D>, Jet<D>)> = self
            .features
            .iter()
            .map(|f| {
                let h = f.scale(0.5);
                (h.cos(), h.sin())
            })
            .collect();
        let mut adj_c = vec![Jet::<D>::zero(); n];
        let mut adj_s = vec![Jet::<D>::zero(); n];
        let mut factors = vec![Jet::<D>::zero(); n];
        let mut prefix = vec![Jet::<D>::zero(); n + 1];
        for b in 0..adj.dim {
            for (q, (c, s)) in half.iter().enumerate() {
                factors[q] = if b & bit_mask(n, q) != 0 { *s } else { *c };
            }
            let (pr, pi) = minus_i_power(b.count_ones());
            let a: ComplexJet<D> = adj.get(b);
            let mut adj_p = a.re.scale(pr);
            adj_p.add_scaled(&a.im, pi);
            prefix[0] = Jet::constant(1.0);
            for q in 0..n {
                prefix[q + 1] = prefix[q] * factors[q];
            }
            let mut suffix = Jet::constant(1.0);
            for q in (0..n).rev() {
                let others = prefix[q] * suffix;
                let g = Jet::mul_adjoint(&adj_p, &others);
                if b & bit_mask(n, q) != 0 {
                    adj_s[q] += g;
                } else {
                    adj_c[q] += g;
                }
                suffix = suffix * factors[q];
            }
        }
        let out = self
            .features
            .iter()
            .enumerate()
            .map(|(q, f)| {
                let (s, c) = (f.v / 2.0).sin_cos();
                let mut a = f.chain_adjoint(-0.5 * s, -0.25 * c, 0.125 * s, &adj_c[q]);
                a += f.chain_adjoint(0.5 * c, -0.25 * s, -0.125 * c, &adj_s[q]);
                a
            })
            .collect();
        Value::Real(out)
    }
}

pub struct AmplitudeEmbedOp<const D: usize> {
    features: Vec<Jet<D>>,
}

impl<const D: usize> AmplitudeEmbedOp<D> {
    pub fn forward(
        features: Vec<Jet<D>>,
        n_qubits: usize,
        tape: Option<&mut ParamTape<D>>,
    ) -> Result<Planes, DvError> {
        let s = QuantumStateDv::amplitude_embed(&features, n_qubits)?;
        record(tape, AmplitudeEmbedOp { features });
        Ok(s.planes)
    }
}

impl<const D: usize> TapeOp<D> for AmplitudeEmbedOp<D> {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, _grad: &mut [f64]) -> Value<D> {
        let adj = adj_out.into_state();
        let (r, s) = amplitude_norm(&self.features).expect("checked in forward");
        let mut adj_r = Jet::<D>::zero();
        let mut out: Vec<Jet<D>> = Vec::with_capacity(self.features.len());
        for (b, f) in self.features.iter().enumerate() {
            let a: ComplexJet<D> = adj.get(b);
            out.push(Jet::mul_adjoint(&a.re, &r));
            adj_r += Jet::mul_adjoint(&a.re, f);
        }
        let (_, d1, d2, d3) = rsqrt_derivs(s.v);
        let adj_s = s.chain_adjoint(d1, d2, d3, &adj_r);
        for (o, f) in out.iter_mut().zip(&self.features) {
            o.add_scaled(&Jet::mul_adjoint(&adj_s, f), 2.0);
        }
        Value::Real(out)
    }
}

/// A gate whose block and derivative were evaluated once per step.
#[derive(Clone, Copy, Debug)]
pub struct PreparedGate {
    pub control: Option<usize>,
    pub target: usize,
    pub m: Mat2,
    pub dm: Mat2,
    /// Global flat parameter index, if trainable.
    pub param: Option<usize>,
}

pub struct GateOp {
    gate: PreparedGate,
    n_qubits: usize,
    input: Planes,
}

impl GateOp {
    pub fn forward<const D: usize>(
        gate: &PreparedGate,
        n_qubits: usize,
        mut state: Planes,
        tape: Option<&mut ParamTape<D>>,
    ) -> Planes {
        let input = tape.as_ref().map(|_| state.clone());
        apply_block(&mut state, n_qubits, gate.control, gate.target, &gate.m);
        if let (Some(t), Some(input)) = (tape, input) {
            t.push(Box::new(GateOp {
                gate: *gate,
                n_qubits,
                input,
            }));
        }
        state
    }
}

impl<const D: usize> TapeOp<D> for GateOp {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, grad: &mut [f64]) -> Value<D> {
        let mut adj = adj_out.into_state();
        let g = &self.gate;
        if let Some(p) = g.param {
            grad[p] += block_sensitivity(&self.input, &adj, self.n_qubits, g.control, g.target, &g.dm);
        }
        apply_block(&mut adj, self.n_qubits, g.control, g.target, &dagger(&g.m));
        Value::State(adj)
    }
}

pub struct PauliZOp {
    n_qubits: usize,
    input: Planes,
}

impl PauliZOp {
    pub fn forward<const D: usize>(
        n_qubits: usize,
        state: Planes,
        tape: Option<&mut ParamTape<D>>,
    ) -> Vec<Jet<D>> {
        let s = QuantumStateDv::<D> {
            n_qubits,
            planes: state,
        };
        let out = s.measure_pauli_z();
        record(
            tape,
            PauliZOp {
                n_qubits,
                input: s.planes,
            },
        );
        out
    }
}

impl<const D: usize> TapeOp<D> for PauliZOp {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, _grad: &mut [f64]) -> Value<D> {
        let adj = adj_out.into_real();
        let mut out = Planes::zeros(self.input.ncomp, self.input.dim);
        for b in 0..self.input.dim {
            let mut adj_p = Jet::<D>::zero();
            for (q, a) in adj.iter().enumerate() {
                let sign = if b & bit_mask(self.n_qubits, q) != 0 { -1.0 } else { 1.0 };
                adj_p.add_scaled(a, sign);
            }
            let z: ComplexJet<D> = self.input.get(b);
            let re = Jet::mul_adjoint(&adj_p, &z.re).scale(2.0);
            let im = Jet::mul_adjoint(&adj_p, &z.im).scale(2.0);
            out.set(b, &ComplexJet::new(re, im));
        }
        Value::State(out)
    }
}

//! Linear-chain tape for reverse accumulation over trainable parameters.
//!
//! Every recorded operation maps one [`Value`] to the next. Backward replay
//! walks the chain in reverse, accumulating `dLoss/dθ` into a flat gradient
//! and handing each operation's input adjoint to its predecessor.

use super::{tanh_derivs, Jet, Planes};

/// Data flowing between recorded operations.
#[derive(Clone, Debug, PartialEq)]
pub enum Value<const D: usize> {
    Real(Vec<Jet<D>>),
    State(Planes),
}

impl<const D: usize> Value<D> {
    pub fn real(&self) -> &[Jet<D>] {
        match self {
            Value::Real(v) => v,
            Value::State(_) => panic!("expected a real vector, found a state"),
        }
    }

    pub fn into_real(self) -> Vec<Jet<D>> {
        match self {
            Value::Real(v) => v,
            Value::State(_) => panic!("expected a real vector, found a state"),
        }
    }

    pub fn into_state(self) -> Planes {
        match self {
            Value::State(p) => p,
            Value::Real(_) => panic!("expected a state, found a real vector"),
        }
    }
}

/// A recorded operation. `params` is the flat parameter vector used during
/// the forward pass.
pub trait TapeOp<const D: usize>: Send {
    fn backward(&self, params: &[f64], adj_out: Value<D>, grad: &mut [f64]) -> Value<D>;
}

pub struct ParamTape<const D: usize> {
    ops: Vec<Box<dyn TapeOp<D>>>,
}

impl<const D: usize> Default for ParamTape<D> {
    fn default() -> Self {
        Self::new()
    }
}

impl<const D: usize> ParamTape<D> {
    pub fn new() -> Self {
        Self { ops: Vec::new() }
    }

    pub fn push(&mut self, op: Box<dyn TapeOp<D>>) {
        self.ops.push(op);
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Replay backward, adding into `grad`. Returns the adjoint of the value
    /// fed to the first recorded operation.
    pub fn backward(&self, params: &[f64], adj_out: Value<D>, grad: &mut [f64]) -> Value<D> {
        let mut adj = adj_out;
        for op in self.ops.iter().rev() {
            adj = op.backward(params, adj, grad);
        }
        adj
    }

    /// Gradient of a scalar loss recorded as the final single-element value.
    pub fn param_gradient(&self, params: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; params.len()];
        self.backward(params, Value::Real(vec![Jet::constant(1.0)]), &mut grad);
        grad
    }
}

fn record<const D: usize>(tape: Option<&mut ParamTape<D>>, op: impl TapeOp<D> + 'static) {
    if let Some(t) = tape {
        t.push(Box::new(op));
    }
}

/// Emits selected parameters as constant jets. Ignores its input.
pub struct ParamLeaf {
    indices: Vec<usize>,
}

impl ParamLeaf {
    pub fn forward<const D: usize>(
        params: &[f64],
        indices: &[usize],
        tape: Option<&mut ParamTape<D>>,
    ) -> Vec<Jet<D>> {
        record(
            tape,
            ParamLeaf {
                indices: indices.to_vec(),
            },
        );
        indices.iter().map(|&i| Jet::constant(params[i])).collect()
    }
}

impl<const D: usize> TapeOp<D> for ParamLeaf {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, grad: &mut [f64]) -> Value<D> {
        for (&i, a) in self.indices.iter().zip(adj_out.real()) {
            grad[i] += a.v;
        }
        Value::Real(Vec::new())
    }
}

/// `y = W x + b` with `W` stored row-major (`out x in`) at `w_off`.
pub struct Affine<const D: usize> {
    input: Vec<Jet<D>>,
    n_out: usize,
    w_off: usize,
    b_off: Option<usize>,
}

impl<const D: usize> Affine<D> {
    pub fn forward(
        params: &[f64],
        input: Vec<Jet<D>>,
        n_out: usize,
        w_off: usize,
        b_off: Option<usize>,
        tape: Option<&mut ParamTape<D>>,
    ) -> Vec<Jet<D>> {
        let n_in = input.len();
        let mut out = Vec::with_capacity(n_out);
        for o in 0..n_out {
            let bias = b_off.map_or(0.0, |b| params[b + o]);
            let mut y = Jet::constant(bias);
            let row = &params[w_off + o * n_in..w_off + (o + 1) * n_in];
            for (w, x) in row.iter().zip(&input) {
                y.add_scaled(x, *w);
            }
            out.push(y);
        }
        record(
            tape,
            Affine {
                input,
                n_out,
                w_off,
                b_off,
            },
        );
        out
    }
}

impl<const D: usize> TapeOp<D> for Affine<D> {
    fn backward(&self, params: &[f64], adj_out: Value<D>, grad: &mut [f64]) -> Value<D> {
        let adj = adj_out.into_real();
        let n_in = self.input.len();
        let mut adj_in = vec![Jet::zero(); n_in];
        for (o, a) in adj.iter().enumerate().take(self.n_out) {
            let off = self.w_off + o * n_in;
            for i in 0..n_in {
                grad[off + i] += a.dot(&self.input[i]);
                adj_in[i].add_scaled(a, params[off + i]);
            }
            if let Some(b) = self.b_off {
                grad[b + o] += a.v;
            }
        }
        Value::Real(adj_in)
    }
}

/// Element-wise hyperbolic tangent.
pub struct Tanh<const D: usize> {
    input: Vec<Jet<D>>,
}

impl<const D: usize> Tanh<D> {
    pub fn forward(input: Vec<Jet<D>>, tape: Option<&mut ParamTape<D>>) -> Vec<Jet<D>> {
        let out = input.iter().map(|x| x.tanh()).collect();
        record(tape, Tanh { input });
        out
    }
}

impl<const D: usize> TapeOp<D> for Tanh<D> {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, _grad: &mut [f64]) -> Value<D> {
        let adj = adj_out.into_real();
        Value::Real(
            self.input
                .iter()
                .zip(&adj)
                .map(|(x, a)| {
                    let (_, d1, d2, d3) = tanh_derivs(x.v);
                    x.chain_adjoint(d1, d2, d3, a)
                })
                .collect(),
        )
    }
}

/// Element-wise square.
pub struct Square<const D: usize> {
    input: Vec<Jet<D>>,
}

impl<const D: usize> Square<D> {
    pub fn forward(input: Vec<Jet<D>>, tape: Option<&mut ParamTape<D>>) -> Vec<Jet<D>> {
        let out = input.iter().map(|x| *x * *x).collect();
        record(tape, Square { input });
        out
    }
}

impl<const D: usize> TapeOp<D> for Square<D> {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, _grad: &mut [f64]) -> Value<D> {
        let adj = adj_out.into_real();
        Value::Real(
            self.input
                .iter()
                .zip(&adj)
                .map(|(x, a)| Jet::mul_adjoint(a, x).scale(2.0))
                .collect(),
        )
    }
}

/// Adds a fixed vector.
pub struct AddConst;

impl AddConst {
    pub fn forward<const D: usize>(
        input: Vec<Jet<D>>,
        c: &[f64],
        tape: Option<&mut ParamTape<D>>,
    ) -> Vec<Jet<D>> {
        record(tape, AddConst);
        input.into_iter().zip(c).map(|(x, &c)| x + c).collect()
    }
}

impl<const D: usize> TapeOp<D> for AddConst {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, _grad: &mut [f64]) -> Value<D> {
        adj_out
    }
}

/// `scale * sum(x)` as a single-element vector.
pub struct SumScaled {
    n: usize,
    scale: f64,
}

impl SumScaled {
    pub fn forward<const D: usize>(
        input: Vec<Jet<D>>,
        scale: f64,
        tape: Option<&mut ParamTape<D>>,
    ) -> Vec<Jet<D>> {
        let mut s = Jet::zero();
        for x in &input {
            s.add_scaled(x, scale);
        }
        record(
            tape,
            SumScaled {
                n: input.len(),
                scale,
            },
        );
        vec![s]
    }
}

impl<const D: usize> TapeOp<D> for SumScaled {
    fn backward(&self, _params: &[f64], adj_out: Value<D>, _grad: &mut [f64]) -> Value<D> {
        let a = adj_out.into_real()[0].scale(self.scale);
        Value::Real(vec![a; self.n])
    }
}

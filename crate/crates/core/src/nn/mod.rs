//! Dense layers and the hybrid pre/core/post model.
//!
//! Parameters live in one flat vector ordered pre layers, core, post layers.
//! Each dense layer stores its row-major `out x in` weights followed by its
//! biases.

mod checkpoint;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{load_checkpoint, save_checkpoint, Manifest};

use crate::autodiff::{Affine, Jet, ParamTape, Tanh};
use crate::cv::{CvCircuit, CvConfig, CvError, CvStep};
use crate::dv::{DvCircuit, DvError, DvTopology, Embedding, PreparedGate, TopologyKind};

/// Width of every classical hidden layer.
pub const HIDDEN: usize = 50;

#[derive(Debug, Error)]
pub enum NnError {
    #[error(transparent)]
    Dv(#[from] DvError),
    #[error(transparent)]
    Cv(#[from] CvError),
    #[error("expected {expected} inputs, got {got}")]
    InputWidth { expected: usize, got: usize },
    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad checkpoint manifest: {0}")]
    Manifest(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Tanh,
    Identity,
}

/// Shape and flat offset of one fully connected layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DenseLayer {
    pub n_in: usize,
    pub n_out: usize,
    pub activation: Activation,
    pub offset: usize,
}

impl DenseLayer {
    pub fn param_count(&self) -> usize {
        self.n_out * self.n_in + self.n_out
    }

    pub fn xavier_bound(&self) -> f64 {
        (6.0 / (self.n_in + self.n_out) as f64).sqrt()
    }

    /// Xavier-uniform weights, zero biases.
    pub fn init_params<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let b = self.xavier_bound();
        let mut out: Vec<f64> = (0..self.n_in * self.n_out)
            .map(|_| rng.random_range(-b..=b))
            .collect();
        out.resize(self.param_count(), 0.0);
        out
    }

    pub fn weights<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[self.offset..self.offset + self.n_in * self.n_out]
    }

    pub fn biases<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        let b = self.offset + self.n_in * self.n_out;
        &params[b..b + self.n_out]
    }

    pub fn forward<const D: usize>(
        &self,
        params: &[f64],
        input: Vec<Jet<D>>,
        mut tape: Option<&mut ParamTape<D>>,
    ) -> Vec<Jet<D>> {
        let b_off = self.offset + self.n_in * self.n_out;
        let y = Affine::forward(params, input, self.n_out, self.offset, Some(b_off), tape.as_deref_mut());
        match self.activation {
            Activation::Tanh => Tanh::forward(y, tape),
            Activation::Identity => y,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Widths `[in, 50, 50, 50, 50, out]`.
    Model1,
    /// Widths `[in, 50, 50, out]`.
    Model2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Architecture {
    Classical {
        baseline: Baseline,
    },
    Dv {
        topology: TopologyKind,
        embedding: Embedding,
        qubits: usize,
        layers: usize,
    },
    Cv {
        #[serde(flatten)]
        config: CvConfig,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n_in: usize,
    pub n_out: usize,
    pub architecture: Architecture,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Core {
    None,
    Dv(DvCircuit),
    Cv(CvCircuit),
}

/// Core gates evaluated once per parameter vector, shared across points.
#[derive(Clone, Debug)]
pub enum PreparedCore {
    None,
    Dv(Vec<PreparedGate>),
    Cv(Vec<CvStep>),
}

/// Model outputs plus the squared norm of the CV state when there is one.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardOutput<const D: usize> {
    pub outputs: Vec<Jet<D>>,
    pub cv_norm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HybridModel {
    pub spec: ModelSpec,
    pub pre: Vec<DenseLayer>,
    pub core: Core,
    pub core_offset: usize,
    pub post: Vec<DenseLayer>,
    param_count: usize,
}

fn stack(widths: &[usize], offset: &mut usize, last_activation: Activation) -> Vec<DenseLayer> {
    let n = widths.len() - 1;
    (0..n)
        .map(|i| {
            let layer = DenseLayer {
                n_in: widths[i],
                n_out: widths[i + 1],
                activation: if i + 1 == n { last_activation } else { Activation::Tanh },
                offset: *offset,
            };
            *offset += layer.param_count();
            layer
        })
        .collect()
}

impl HybridModel {
    pub fn new(spec: ModelSpec) -> Result<Self, NnError> {
        let (n_in, n_out) = (spec.n_in, spec.n_out);
        let mut offset = 0;
        let (core, q) = match spec.architecture {
            Architecture::Classical { baseline } => {
                let widths = match baseline {
                    Baseline::Model1 => vec![n_in, HIDDEN, HIDDEN, HIDDEN, HIDDEN, n_out],
                    Baseline::Model2 => vec![n_in, HIDDEN, HIDDEN, n_out],
                };
                let pre = stack(&widths, &mut offset, Activation::Identity);
                return Ok(Self {
                    spec,
                    pre,
                    core: Core::None,
                    core_offset: offset,
                    post: Vec::new(),
                    param_count: offset,
                });
            }
            Architecture::Dv {
                topology,
                embedding,
                qubits,
                layers,
            } => {
                let t = DvTopology::new(topology, qubits, layers)?;
                (Core::Dv(DvCircuit::new(t, embedding)), qubits)
            }
            Architecture::Cv { config } => (Core::Cv(CvCircuit::new(config)?), config.modes),
        };
        let pre = stack(&[n_in, HIDDEN, q], &mut offset, Activation::Identity);
        let core_offset = offset;
        offset += match &core {
            Core::Dv(c) => c.param_count(),
            Core::Cv(c) => c.param_count(),
            Core::None => 0,
        };
        let post = stack(&[q, HIDDEN, n_out], &mut offset, Activation::Identity);
        Ok(Self {
            spec,
            pre,
            core,
            core_offset,
            post,
            param_count: offset,
        })
    }

    /// Classical baseline with the given input and output widths.
    pub fn baseline(baseline: Baseline, n_in: usize, n_out: usize) -> Self {
        Self::new(ModelSpec {
            n_in,
            n_out,
            architecture: Architecture::Classical { baseline },
        })
        .expect("classical models always build")
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.pre.iter().chain(&self.post)
    }

    pub fn core_param_count(&self) -> usize {
        match &self.core {
            Core::None => 0,
            Core::Dv(c) => c.param_count(),
            Core::Cv(c) => c.param_count(),
        }
    }

    pub fn init_params<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count);
        for l in &self.pre {
            out.extend(l.init_params(rng));
        }
        match &self.core {
            Core::None => {}
            Core::Dv(c) => out.extend(c.init_params(rng)),
            Core::Cv(c) => out.extend(c.init_params(rng)),
        }
        for l in &self.post {
            out.extend(l.init_params(rng));
        }
        out
    }

    pub fn check_params(&self, params: &[f64]) -> Result<(), NnError> {
        if params.len() != self.param_count {
            return Err(NnError::ParamCount {
                expected: self.param_count,
                got: params.len(),
            });
        }
        Ok(())
    }

    pub fn prepare(&self, params: &[f64]) -> Result<PreparedCore, NnError> {
        self.check_params(params)?;
        Ok(match &self.core {
            Core::None => PreparedCore::None,
            Core::Dv(c) => PreparedCore::Dv(c.prepare(params, self.core_offset)),
            Core::Cv(c) => PreparedCore::Cv(c.prepare(params, self.core_offset)),
        })
    }

    /// Forward pass on seeded coordinates; with a tape, records every
    /// parameter dependency for reverse accumulation.
    pub fn forward<const D: usize>(
        &self,
        prepared: &PreparedCore,
        params: &[f64],
        coords: Vec<Jet<D>>,
        mut tape: Option<&mut ParamTape<D>>,
    ) -> Result<ForwardOutput<D>, NnError> {
        if coords.len() != self.spec.n_in {
            return Err(NnError::InputWidth {
                expected: self.spec.n_in,
                got: coords.len(),
            });
        }
        self.check_params(params)?;
        let mut x = coords;
        for l in &self.pre {
            x = l.forward(params, x, tape.as_deref_mut());
        }
        let mut cv_norm = None;
        match (&self.core, prepared) {
            (Core::None, _) => {}
            (Core::Dv(c), PreparedCore::Dv(g)) => x = c.forward(g, x, tape.as_deref_mut())?,
            (Core::Cv(c), PreparedCore::Cv(s)) => {
                let (y, n) = c.forward(s, x, tape.as_deref_mut())?;
                x = y;
                cv_norm = Some(n);
            }
            _ => panic!("prepared core does not match the model"),
        }
        for l in &self.post {
            x = l.forward(params, x, tape.as_deref_mut());
        }
        Ok(ForwardOutput {
            outputs: x,
            cv_norm,
        })
    }

    /// Plain values at a point, for evaluation grids.
    pub fn eval(&self, prepared: &PreparedCore, params: &[f64], coords: &[f64]) -> Result<Vec<f64>, NnError> {
        let x = coords.iter().map(|&c| Jet::<0>::constant(c)).collect();
        let out = self.forward(prepared, params, x, None)?;
        Ok(out.outputs.iter().map(|j| j.v).collect())
    }
}

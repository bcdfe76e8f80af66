//! Discrete-variable circuit simulator.

mod ops;
mod state;
mod topology;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ops::{AmplitudeEmbedOp, AngleEmbedOp, GateOp, PauliZOp, PreparedGate};
pub use state::{dagger, gate_matrix, Mat2, QuantumStateDv};
pub use topology::{DvTopology, Gate, GateKind, TopologyKind};

use crate::autodiff::{Jet, ParamTape};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DvError {
    #[error("unknown topology {0:?}")]
    UnknownTopology(String),
    #[error("unknown embedding {0:?}")]
    UnknownEmbedding(String),
    #[error("a circuit needs at least 2 qubits, got {0}")]
    TooFewQubits(usize),
    #[error("a circuit needs at least one layer")]
    NoLayers,
    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("gate acts twice on qubit {0}")]
    DuplicateQubit(usize),
    #[error("gate expects {expected} qubits, got {got}")]
    GateArity { expected: usize, got: usize },
    #[error("rotation gate without an angle")]
    MissingAngle,
    #[error("expected {expected} features, got {got}")]
    FeatureCount { expected: usize, got: usize },
    #[error("amplitude embedding of an all-zero feature vector")]
    DegenerateInput,
    #[error("expected {expected} circuit parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Embedding {
    Angle,
    Amplitude,
}

impl Embedding {
    pub const ALL: [Embedding; 2] = [Embedding::Angle, Embedding::Amplitude];

    pub fn name(self) -> &'static str {
        match self {
            Embedding::Angle => "angle",
            Embedding::Amplitude => "amplitude",
        }
    }
}

impl fmt::Display for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Embedding {
    type Err = DvError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Embedding::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| DvError::UnknownEmbedding(s.to_string()))
    }
}

/// A layout gate with its angle filled in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundGate {
    pub gate: Gate,
    pub theta: Option<f64>,
}

/// Bind a parameter slice to the topology's gate sequence.
pub fn build_ansatz(topology: &DvTopology, params: &[f64]) -> Result<Vec<BoundGate>, DvError> {
    if params.len() != topology.param_count() {
        return Err(DvError::ParamCount {
            expected: topology.param_count(),
            got: params.len(),
        });
    }
    Ok(topology
        .gates()
        .into_iter()
        .map(|gate| BoundGate {
            gate,
            theta: gate.param.map(|p| params[p]),
        })
        .collect())
}

/// Embedding, ansatz and Pauli-Z readout as one differentiable block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DvCircuit {
    pub topology: DvTopology,
    pub embedding: Embedding,
}

impl DvCircuit {
    pub fn new(topology: DvTopology, embedding: Embedding) -> Self {
        Self {
            topology,
            embedding,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.topology.n_qubits
    }

    pub fn param_count(&self) -> usize {
        self.topology.param_count()
    }

    /// Angles uniform in `[0, 2pi)`.
    pub fn init_params<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.param_count())
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect()
    }

    /// Evaluate gate blocks once for a parameter slice starting at global
    /// offset `offset`.
    pub fn prepare(&self, params: &[f64], offset: usize) -> Vec<PreparedGate> {
        self.topology
            .gates()
            .into_iter()
            .map(|g| {
                let theta = g.param.map_or(0.0, |p| params[offset + p]);
                let (m, dm) = gate_matrix(g.kind, theta);
                PreparedGate {
                    control: g.control,
                    target: g.target,
                    m,
                    dm,
                    param: g.param.map(|p| offset + p),
                }
            })
            .collect()
    }

    pub fn forward<const D: usize>(
        &self,
        prepared: &[PreparedGate],
        features: Vec<Jet<D>>,
        mut tape: Option<&mut ParamTape<D>>,
    ) -> Result<Vec<Jet<D>>, DvError> {
        let n = self.n_qubits();
        let mut s = match self.embedding {
            Embedding::Angle => AngleEmbedOp::forward(features, n, tape.as_deref_mut())?,
            Embedding::Amplitude => AmplitudeEmbedOp::forward(features, n, tape.as_deref_mut())?,
        };
        for g in prepared {
            s = GateOp::forward(g, n, s, tape.as_deref_mut());
        }
        Ok(PauliZOp::forward(n, s, tape))
    }
}

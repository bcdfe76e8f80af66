//! Ansatz layouts.
//!
//! A layout is a list of moments; gates inside a moment act on disjoint
//! qubits. Depth is the number of moments in the layout. Parameters are
//! numbered in emission order: moment by moment, ascending qubit inside a
//! moment, layer after layer.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DvError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    CRX,
    CRZ,
    CNOT,
}

impl GateKind {
    pub fn is_parametric(self) -> bool {
        !matches!(self, GateKind::CNOT)
    }

    pub fn is_two_qubit(self) -> bool {
        matches!(self, GateKind::CRX | GateKind::CRZ | GateKind::CNOT)
    }
}

/// A gate slot in a layout. `param` indexes the circuit's parameter slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub control: Option<usize>,
    pub target: usize,
    pub param: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    Alternate,
    Cascade,
    CrossMesh,
    Layered,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 4] = [
        TopologyKind::Alternate,
        TopologyKind::Cascade,
        TopologyKind::CrossMesh,
        TopologyKind::Layered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Alternate => "alternate",
            TopologyKind::Cascade => "cascade",
            TopologyKind::CrossMesh => "cross-mesh",
            TopologyKind::Layered => "layered",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = DvError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TopologyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| DvError::UnknownTopology(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DvTopology {
    pub kind: TopologyKind,
    pub n_qubits: usize,
    pub n_layers: usize,
}

impl DvTopology {
    /// Builds the topology and checks its layout against the closed-form
    /// parameter, depth and entangler counts.
    pub fn new(kind: TopologyKind, n_qubits: usize, n_layers: usize) -> Result<Self, DvError> {
        if n_qubits < 2 {
            return Err(DvError::TooFewQubits(n_qubits));
        }
        if n_layers == 0 {
            return Err(DvError::NoLayers);
        }
        let t = Self {
            kind,
            n_qubits,
            n_layers,
        };
        let moments = t.moments();
        let params = moments.iter().flatten().filter(|g| g.param.is_some()).count();
        let two_q = moments.iter().flatten().filter(|g| g.kind.is_two_qubit()).count();
        assert_eq!(params, t.param_count(), "{kind} parameter count");
        assert_eq!(moments.len(), t.depth(), "{kind} depth");
        assert_eq!(two_q, t.two_qubit_count(), "{kind} entangler count");
        Ok(t)
    }

    pub fn param_count(&self) -> usize {
        let (n, l) = (self.n_qubits, self.n_layers);
        l * match self.kind {
            TopologyKind::Alternate => 4 * (n - 1),
            TopologyKind::Cascade => 3 * n,
            TopologyKind::CrossMesh => n * n + 3 * n,
            TopologyKind::Layered => 4 * n,
        }
    }

    pub fn depth(&self) -> usize {
        let (n, l) = (self.n_qubits, self.n_layers);
        l * match self.kind {
            TopologyKind::Alternate | TopologyKind::Layered => 6,
            TopologyKind::Cascade => n + 2,
            TopologyKind::CrossMesh => n * n - n + 4,
        }
    }

    pub fn two_qubit_count(&self) -> usize {
        let (n, l) = (self.n_qubits, self.n_layers);
        l * match self.kind {
            TopologyKind::Alternate | TopologyKind::Layered => n - 1,
            TopologyKind::Cascade => n,
            TopologyKind::CrossMesh => n * n - n,
        }
    }

    /// Moments of the full circuit with globally numbered parameters.
    pub fn moments(&self) -> Vec<Vec<Gate>> {
        let mut out = Vec::new();
        let mut next = 0usize;
        for _ in 0..self.n_layers {
            for moment in self.layer_template() {
                let gates = moment
                    .into_iter()
                    .map(|(kind, control, target)| {
                        let param = kind.is_parametric().then(|| {
                            next += 1;
                            next - 1
                        });
                        Gate {
                            kind,
                            control,
                            target,
                            param,
                        }
                    })
                    .collect();
                out.push(gates);
            }
        }
        out
    }

    /// Flattened gate sequence in execution order.
    pub fn gates(&self) -> Vec<Gate> {
        self.moments().into_iter().flatten().collect()
    }

    /// Longest path through the gate dependency graph, ignoring moment
    /// boundaries. Never exceeds [`DvTopology::depth`].
    pub fn asap_depth(&self) -> usize {
        let mut level = vec![0usize; self.n_qubits];
        for g in self.gates() {
            let mut l = level[g.target];
            if let Some(c) = g.control {
                l = l.max(level[c]);
            }
            level[g.target] = l + 1;
            if let Some(c) = g.control {
                level[c] = l + 1;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    fn layer_template(&self) -> Vec<Vec<(GateKind, Option<usize>, usize)>> {
        use GateKind::*;
        let n = self.n_qubits;
        let all = |k: GateKind| (0..n).map(|q| (k, None, q)).collect::<Vec<_>>();
        let pairs = |start: usize| {
            (start..n.saturating_sub(1))
                .step_by(2)
                .map(|q| (q, q + 1))
                .collect::<Vec<_>>()
        };
        let on_pairs = |k: GateKind, p: &[(usize, usize)]| {
            p.iter()
                .flat_map(|&(a, b)| [(k, None, a), (k, None, b)])
                .collect::<Vec<_>>()
        };
        let cnots = |p: &[(usize, usize)]| {
            p.iter()
                .map(|&(a, b)| (CNOT, Some(a), b))
                .collect::<Vec<_>>()
        };
        match self.kind {
            TopologyKind::Alternate => {
                let even = pairs(0);
                let odd = pairs(1);
                vec![
                    on_pairs(RY, &even),
                    on_pairs(RX, &even),
                    cnots(&even),
                    on_pairs(RY, &odd),
                    on_pairs(RX, &odd),
                    cnots(&odd),
                ]
            }
            TopologyKind::Cascade => {
                let mut m = vec![all(RY)];
                for i in 0..n {
                    m.push(vec![(CRX, Some(i), (i + 1) % n)]);
                }
                m.push(all(RY));
                m
            }
            TopologyKind::CrossMesh => {
                let mut m = vec![all(RY), all(RZ)];
                // consecutive entanglers share a qubit, so each needs its own moment
                for i in 0..n {
                    for s in (2..n).chain(std::iter::once(1)) {
                        m.push(vec![(CRZ, Some(i), (i + s) % n)]);
                    }
                }
                m.push(all(RZ));
                m.push(all(RY));
                m
            }
            TopologyKind::Layered => vec![
                all(RZ),
                all(RX),
                cnots(&pairs(0)),
                cnots(&pairs(1)),
                all(RZ),
                all(RX),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cascade_five_qubits_one_layer() {
        let t = DvTopology::new(TopologyKind::Cascade, 5, 1).unwrap();
        assert_eq!(t.param_count(), 15);
        assert_eq!(t.two_qubit_count(), 5);
        assert_eq!(t.depth(), 7);
    }

    #[test]
    fn alternate_five_qubits_two_layers() {
        let t = DvTopology::new(TopologyKind::Alternate, 5, 2).unwrap();
        assert_eq!(t.param_count(), 32);
        assert_eq!(t.depth(), 12);
    }

    #[test]
    fn cross_mesh_five_qubits() {
        let t = DvTopology::new(TopologyKind::CrossMesh, 5, 1).unwrap();
        assert_eq!(t.param_count(), 40);
        assert_eq!(t.two_qubit_count(), 20);
        assert_eq!(t.depth(), 24);
    }

    #[test]
    fn moments_touch_disjoint_qubits() {
        for kind in TopologyKind::ALL {
            for n in 2..=8 {
                let t = DvTopology::new(kind, n, 2).unwrap();
                for m in t.moments() {
                    let mut seen = vec![false; n];
                    for g in m {
                        for q in g.control.into_iter().chain([g.target]) {
                            assert!(!seen[q], "{kind} n={n} reuses qubit {q}");
                            seen[q] = true;
                        }
                    }
                }
                assert!(t.asap_depth() <= t.depth());
            }
        }
    }

    #[test]
    fn cross_mesh_entanglers_cover_all_ordered_pairs() {
        let t = DvTopology::new(TopologyKind::CrossMesh, 4, 1).unwrap();
        let mut pairs: Vec<_> = t
            .gates()
            .into_iter()
            .filter_map(|g| g.control.map(|c| (c, g.target)))
            .collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), 12);
    }

    #[test]
    fn parameters_are_numbered_densely() {
        let t = DvTopology::new(TopologyKind::Layered, 3, 2).unwrap();
        let idx: Vec<_> = t.gates().iter().filter_map(|g| g.param).collect();
        assert_eq!(idx, (0..24).collect::<Vec<_>>());
    }

    #[test]
    fn names_roundtrip() {
        for k in TopologyKind::ALL {
            assert_eq!(k.name().parse::<TopologyKind>().unwrap(), k);
        }
        assert!("star".parse::<TopologyKind>().is_err());
    }
}

//! Continuous-variable circuit simulator in a truncated Fock basis.
//!
//! Quadrature convention: `q = a + a^dag`. Mode 0 is the most significant
//! digit of the basis index.

mod fock;
mod kernels;
mod ops;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fock::{beamsplitter, cubic_generator, cubic_phase, displacement, squeezing, BsBlock, CMat, GateMats};
pub use kernels::FockShape;
pub use ops::{coherent_derivs, CvStep, EncodeOp, MeasureOp};

use crate::autodiff::{Jet, ParamTape, Planes};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CvError {
    #[error("unknown {field} {value:?}")]
    UnknownOption { field: &'static str, value: String },
    #[error("expected {expected} features, got {got}")]
    FeatureCount { expected: usize, got: usize },
    #[error("mode {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("beamsplitter needs two distinct modes")]
    SameMode,
    #[error("cross-Kerr needs at least 2 modes")]
    CrossKerrNeedsTwoModes,
    #[error("expected {expected} strengths, got {got}")]
    StrengthCount { expected: usize, got: usize },
    #[error("layer parameters do not match {0} modes")]
    LayerShape(usize),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("cutoff must be at least 2, got {0}")]
    Cutoff(usize),
    #[error("expected {expected} circuit parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
}

macro_rules! named_enum {
    ($ty:ident, $field:literal, $($var:ident => $name:literal),+) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$var),+];
            pub fn name(self) -> &'static str {
                match self { $($ty::$var => $name),+ }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
        impl FromStr for $ty {
            type Err = CvError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $ty::ALL.iter().copied().find(|k| k.name() == s).ok_or_else(|| {
                    CvError::UnknownOption { field: $field, value: s.to_string() }
                })
            }
        }
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measurement {
    Quadrature,
    Number,
}
named_enum!(Measurement, "measurement", Quadrature => "quadrature", Number => "number");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    Kerr,
    #[serde(rename = "cubic")]
    CubicPhase,
    CrossKerr,
}
named_enum!(Nonlinearity, "nonlinearity", Kerr => "kerr", CubicPhase => "cubic", CrossKerr => "cross-kerr");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameterization {
    Full,
    PhaseFree,
}
named_enum!(Parameterization, "parameterization", Full => "full", PhaseFree => "phase-free");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub modes: usize,
    pub cutoff: usize,
    pub layers: usize,
    pub measurement: Measurement,
    pub nonlinearity: Nonlinearity,
    pub parameterization: Parameterization,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            modes: 2,
            cutoff: 20,
            layers: 1,
            measurement: Measurement::Quadrature,
            nonlinearity: Nonlinearity::Kerr,
            parameterization: Parameterization::Full,
        }
    }
}

/// Beamsplitter pairs of one interferometer, in application order.
pub fn interferometer_pairs(modes: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for l in 0..modes {
        for k in 0..modes.saturating_sub(1) {
            if (l + k) % 2 != 1 {
                out.push((k, k + 1));
            }
        }
    }
    out
}

fn nonlinear_count(modes: usize, nl: Nonlinearity) -> usize {
    match nl {
        Nonlinearity::CrossKerr => modes.saturating_sub(1),
        _ => modes,
    }
}

/// Parameter values of one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct CvLayerParams {
    /// `(theta, phi)` per beamsplitter of the first interferometer.
    pub bs1: Vec<(f64, f64)>,
    /// Rotation angles on modes `0..m-1`.
    pub rot1: Vec<f64>,
    /// `(r, phi)` per mode.
    pub squeeze: Vec<(f64, f64)>,
    pub bs2: Vec<(f64, f64)>,
    pub rot2: Vec<f64>,
    /// `(alpha, phi)` per mode.
    pub displace: Vec<(f64, f64)>,
    /// Per mode, or per adjacent pair for cross-Kerr.
    pub nonlinear: Vec<f64>,
}

impl CvLayerParams {
    pub fn zeros(modes: usize, nl: Nonlinearity) -> Self {
        let nbs = interferometer_pairs(modes).len();
        let nrot = modes.saturating_sub(1);
        Self {
            bs1: vec![(0.0, 0.0); nbs],
            rot1: vec![0.0; nrot],
            squeeze: vec![(0.0, 0.0); modes],
            bs2: vec![(0.0, 0.0); nbs],
            rot2: vec![0.0; nrot],
            displace: vec![(0.0, 0.0); modes],
            nonlinear: vec![0.0; nonlinear_count(modes, nl)],
        }
    }

    fn matches(&self, modes: usize, nl: Nonlinearity) -> bool {
        let z = Self::zeros(modes, nl);
        self.bs1.len() == z.bs1.len()
            && self.rot1.len() == z.rot1.len()
            && self.squeeze.len() == modes
            && self.bs2.len() == z.bs2.len()
            && self.rot2.len() == z.rot2.len()
            && self.displace.len() == modes
            && self.nonlinear.len() == z.nonlinear.len()
    }
}

/// Flat indices mirroring [`CvLayerParams`]; `None` marks a frozen slot.
#[derive(Clone, Debug, PartialEq)]
struct LayerSlots {
    bs1: Vec<(Option<usize>, Option<usize>)>,
    rot1: Vec<Option<usize>>,
    squeeze: Vec<(Option<usize>, Option<usize>)>,
    bs2: Vec<(Option<usize>, Option<usize>)>,
    rot2: Vec<Option<usize>>,
    displace: Vec<(Option<usize>, Option<usize>)>,
    nonlinear: Vec<Option<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SlotKind {
    Passive,
    Active,
    Nonlinear,
}

fn diag_weights(shape: FockShape, f: impl Fn(&dyn Fn(usize) -> f64) -> f64) -> Arc<Vec<f64>> {
    Arc::new(
        (0..shape.dim())
            .map(|b| f(&|k| shape.digit(b, k) as f64))
            .collect(),
    )
}

fn layer_steps(
    shape: FockShape,
    nl: Nonlinearity,
    v: &CvLayerParams,
    slots: Option<&LayerSlots>,
) -> Vec<CvStep> {
    let c = shape.cutoff;
    let m = shape.modes;
    let pairs = interferometer_pairs(m);
    let mut steps = Vec::new();
    let interferometer = |steps: &mut Vec<CvStep>,
                          bs: &[(f64, f64)],
                          rot: &[f64],
                          bs_slots: Option<&[(Option<usize>, Option<usize>)]>,
                          rot_slots: Option<&[Option<usize>]>| {
        for (i, (&(a, b), &(theta, phi))) in pairs.iter().zip(bs).enumerate() {
            let (ts, ps) = bs_slots.map_or((None, None), |s| s[i]);
            steps.push(CvStep::Beamsplitter {
                a,
                b,
                blocks: Arc::new(beamsplitter(theta, phi, c)),
                theta: ts,
                phi: ps,
            });
        }
        for (k, &phi) in rot.iter().enumerate() {
            steps.push(CvStep::Diagonal {
                weights: diag_weights(shape, |n| n(k)),
                kappa: phi,
                param: rot_slots.and_then(|s| s[k]),
            });
        }
    };
    interferometer(
        &mut steps,
        &v.bs1,
        &v.rot1,
        slots.map(|s| s.bs1.as_slice()),
        slots.map(|s| s.rot1.as_slice()),
    );
    for (k, &(r, phi)) in v.squeeze.iter().enumerate() {
        let (rs, ps) = slots.map_or((None, None), |s| s.squeeze[k]);
        steps.push(CvStep::Mode {
            mode: k,
            mats: Arc::new(squeezing(r, phi, c)),
            params: vec![rs, ps],
        });
    }
    interferometer(
        &mut steps,
        &v.bs2,
        &v.rot2,
        slots.map(|s| s.bs2.as_slice()),
        slots.map(|s| s.rot2.as_slice()),
    );
    for (k, &(a, phi)) in v.displace.iter().enumerate() {
        let (rs, ps) = slots.map_or((None, None), |s| s.displace[k]);
        steps.push(CvStep::Mode {
            mode: k,
            mats: Arc::new(displacement(a, phi, c)),
            params: vec![rs, ps],
        });
    }
    for (k, &kappa) in v.nonlinear.iter().enumerate() {
        let param = slots.and_then(|s| s.nonlinear[k]);
        steps.push(match nl {
            Nonlinearity::Kerr => CvStep::Diagonal {
                weights: diag_weights(shape, |n| n(k) * n(k)),
                kappa,
                param,
            },
            Nonlinearity::CrossKerr => CvStep::Diagonal {
                weights: diag_weights(shape, |n| n(k) * n(k + 1)),
                kappa,
                param,
            },
            Nonlinearity::CubicPhase => CvStep::Mode {
                mode: k,
                mats: Arc::new(cubic_phase(kappa, c)),
                params: vec![param],
            },
        });
    }
    steps
}

/// Coherent encoding, stacked layers and readout as one differentiable block.
#[derive(Clone, Debug, PartialEq)]
pub struct CvCircuit {
    pub config: CvConfig,
    slots: Vec<LayerSlots>,
    kinds: Vec<SlotKind>,
}

impl CvCircuit {
    pub fn new(config: CvConfig) -> Result<Self, CvError> {
        if config.cutoff < 2 {
            return Err(CvError::Cutoff(config.cutoff));
        }
        if config.nonlinearity == Nonlinearity::CrossKerr && config.modes < 2 {
            return Err(CvError::CrossKerrNeedsTwoModes);
        }
        let free = config.parameterization == Parameterization::Full;
        let mut kinds = Vec::new();
        let mut take = |kind: SlotKind, trainable: bool| {
            trainable.then(|| {
                kinds.push(kind);
                kinds.len() - 1
            })
        };
        let m = config.modes;
        let nbs = interferometer_pairs(m).len();
        let mut slots = Vec::new();
        for _ in 0..config.layers {
            let interferometer = |take: &mut dyn FnMut(SlotKind, bool) -> Option<usize>| {
                let bs: Vec<_> = (0..nbs)
                    .map(|_| (take(SlotKind::Passive, true), take(SlotKind::Passive, free)))
                    .collect();
                let rot: Vec<_> = (0..m.saturating_sub(1))
                    .map(|_| take(SlotKind::Passive, true))
                    .collect();
                (bs, rot)
            };
            let (bs1, rot1) = interferometer(&mut take);
            let squeeze = (0..m)
                .map(|_| (take(SlotKind::Active, true), take(SlotKind::Passive, free)))
                .collect();
            let (bs2, rot2) = interferometer(&mut take);
            let displace = (0..m)
                .map(|_| (take(SlotKind::Active, true), take(SlotKind::Passive, free)))
                .collect();
            let nonlinear = (0..nonlinear_count(m, config.nonlinearity))
                .map(|_| take(SlotKind::Nonlinear, true))
                .collect();
            slots.push(LayerSlots {
                bs1,
                rot1,
                squeeze,
                bs2,
                rot2,
                displace,
                nonlinear,
            });
        }
        Ok(Self {
            config,
            slots,
            kinds,
        })
    }

    pub fn shape(&self) -> FockShape {
        FockShape {
            modes: self.config.modes,
            cutoff: self.config.cutoff,
        }
    }

    pub fn param_count(&self) -> usize {
        self.kinds.len()
    }

    /// Passive phases `N(0, 0.01 pi)`, active magnitudes and nonlinear
    /// strengths `N(0, 0.001)`.
    pub fn init_params<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let passive = Normal::new(0.0, 0.01 * std::f64::consts::PI).expect("valid std");
        let small = Normal::new(0.0, 0.001).expect("valid std");
        self.kinds
            .iter()
            .map(|k| match k {
                SlotKind::Passive => passive.sample(rng),
                SlotKind::Active | SlotKind::Nonlinear => small.sample(rng),
            })
            .collect()
    }

    /// Values of layer `l`, with frozen slots at zero.
    pub fn layer_params(&self, params: &[f64], offset: usize, l: usize) -> CvLayerParams {
        let s = &self.slots[l];
        let get = |i: Option<usize>| i.map_or(0.0, |i| params[offset + i]);
        let pair = |v: &[(Option<usize>, Option<usize>)]| {
            v.iter().map(|&(a, b)| (get(a), get(b))).collect()
        };
        let single = |v: &[Option<usize>]| v.iter().map(|&a| get(a)).collect();
        CvLayerParams {
            bs1: pair(&s.bs1),
            rot1: single(&s.rot1),
            squeeze: pair(&s.squeeze),
            bs2: pair(&s.bs2),
            rot2: single(&s.rot2),
            displace: pair(&s.displace),
            nonlinear: single(&s.nonlinear),
        }
    }

    /// Evaluate every gate once for a parameter slice at global `offset`.
    pub fn prepare(&self, params: &[f64], offset: usize) -> Vec<CvStep> {
        let shift = |o: Option<usize>| o.map(|i| i + offset);
        let mut steps = Vec::new();
        for (l, slots) in self.slots.iter().enumerate() {
            let v = self.layer_params(params, offset, l);
            let pair = |s: &[(Option<usize>, Option<usize>)]| {
                s.iter().map(|&(a, b)| (shift(a), shift(b))).collect()
            };
            let single = |s: &[Option<usize>]| s.iter().map(|&a| shift(a)).collect();
            let global = LayerSlots {
                bs1: pair(&slots.bs1),
                rot1: single(&slots.rot1),
                squeeze: pair(&slots.squeeze),
                bs2: pair(&slots.bs2),
                rot2: single(&slots.rot2),
                displace: pair(&slots.displace),
                nonlinear: single(&slots.nonlinear),
            };
            steps.extend(layer_steps(
                self.shape(),
                self.config.nonlinearity,
                &v,
                Some(&global),
            ));
        }
        steps
    }

    /// Returns the readout and the squared norm of the final state.
    pub fn forward<const D: usize>(
        &self,
        steps: &[CvStep],
        features: Vec<Jet<D>>,
        mut tape: Option<&mut ParamTape<D>>,
    ) -> Result<(Vec<Jet<D>>, f64), CvError> {
        let shape = self.shape();
        let mut s = EncodeOp::forward(features, shape, tape.as_deref_mut())?;
        for step in steps {
            s = step.forward(s, shape, tape.as_deref_mut());
        }
        MeasureOp::forward(s, shape, self.config.measurement, tape)
    }
}

/// Fock-basis state over `modes` qumodes whose amplitudes carry input
/// derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumStateCv<const D: usize> {
    pub shape: FockShape,
    pub planes: Planes,
}

impl<const D: usize> QuantumStateCv<D> {
    pub fn vacuum(modes: usize, cutoff: usize) -> Self {
        let shape = FockShape { modes, cutoff };
        Self {
            shape,
            planes: Planes::basis(Jet::<D>::NCOMP, shape.dim(), 0),
        }
    }

    /// Basis state with the given occupation per mode.
    pub fn fock(occupation: &[usize], cutoff: usize) -> Self {
        let shape = FockShape {
            modes: occupation.len(),
            cutoff,
        };
        let index = occupation
            .iter()
            .enumerate()
            .map(|(k, &n)| n * shape.stride(k))
            .sum();
        Self {
            shape,
            planes: Planes::basis(Jet::<D>::NCOMP, shape.dim(), index),
        }
    }

    /// `D(features[k], 0)` on every mode of the vacuum.
    pub fn encode(features: &[Jet<D>], modes: usize, cutoff: usize) -> Result<Self, CvError> {
        let shape = FockShape { modes, cutoff };
        let planes = EncodeOp::forward(features.to_vec(), shape, None)?;
        Ok(Self { shape, planes })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.planes.norm_sqr()
    }

    fn check_mode(&self, mode: usize) -> Result<(), CvError> {
        if mode >= self.shape.modes {
            return Err(CvError::ModeOutOfRange {
                mode,
                modes: self.shape.modes,
            });
        }
        Ok(())
    }

    fn step(&mut self, step: CvStep) {
        self.planes = step.apply(&self.planes, self.shape);
    }

    fn mode_step(&mut self, mode: usize, mats: GateMats) -> Result<(), CvError> {
        self.check_mode(mode)?;
        self.step(CvStep::Mode {
            mode,
            mats: Arc::new(mats),
            params: vec![],
        });
        Ok(())
    }

    pub fn displace(&mut self, mode: usize, alpha: f64, phi: f64) -> Result<(), CvError> {
        self.mode_step(mode, displacement(alpha, phi, self.shape.cutoff))
    }

    pub fn squeeze(&mut self, mode: usize, r: f64, phi: f64) -> Result<(), CvError> {
        self.mode_step(mode, squeezing(r, phi, self.shape.cutoff))
    }

    pub fn cubic_phase(&mut self, mode: usize, gamma: f64) -> Result<(), CvError> {
        self.mode_step(mode, cubic_phase(gamma, self.shape.cutoff))
    }

    pub fn rotate(&mut self, mode: usize, phi: f64) -> Result<(), CvError> {
        self.check_mode(mode)?;
        let w = diag_weights(self.shape, |n| n(mode));
        self.step(CvStep::Diagonal {
            weights: w,
            kappa: phi,
            param: None,
        });
        Ok(())
    }

    pub fn kerr(&mut self, mode: usize, kappa: f64) -> Result<(), CvError> {
        self.check_mode(mode)?;
        let w = diag_weights(self.shape, |n| n(mode) * n(mode));
        self.step(CvStep::Diagonal {
            weights: w,
            kappa,
            param: None,
        });
        Ok(())
    }

    pub fn cross_kerr(&mut self, a: usize, b: usize, kappa: f64) -> Result<(), CvError> {
        self.check_mode(a)?;
        self.check_mode(b)?;
        if a == b {
            return Err(CvError::SameMode);
        }
        let w = diag_weights(self.shape, |n| n(a) * n(b));
        self.step(CvStep::Diagonal {
            weights: w,
            kappa,
            param: None,
        });
        Ok(())
    }

    pub fn beamsplitter(&mut self, a: usize, b: usize, theta: f64, phi: f64) -> Result<(), CvError> {
        self.check_mode(a)?;
        self.check_mode(b)?;
        if a == b {
            return Err(CvError::SameMode);
        }
        let blocks = Arc::new(beamsplitter(theta, phi, self.shape.cutoff));
        self.step(CvStep::Beamsplitter {
            a,
            b,
            blocks,
            theta: None,
            phi: None,
        });
        Ok(())
    }

    /// Per-mode strengths; cross-Kerr takes one per adjacent pair.
    pub fn apply_nonlinearity(&mut self, nl: Nonlinearity, strengths: &[f64]) -> Result<(), CvError> {
        if nl == Nonlinearity::CrossKerr && self.shape.modes < 2 {
            return Err(CvError::CrossKerrNeedsTwoModes);
        }
        let expected = nonlinear_count(self.shape.modes, nl);
        if strengths.len() != expected {
            return Err(CvError::StrengthCount {
                expected,
                got: strengths.len(),
            });
        }
        for (k, &s) in strengths.iter().enumerate() {
            match nl {
                Nonlinearity::Kerr => self.kerr(k, s)?,
                Nonlinearity::CubicPhase => self.cubic_phase(k, s)?,
                Nonlinearity::CrossKerr => self.cross_kerr(k, k + 1, s)?,
            }
        }
        Ok(())
    }

    /// Interferometer, squeezing, interferometer, displacement, nonlinearity.
    pub fn apply_layer(&mut self, params: &CvLayerParams, nl: Nonlinearity) -> Result<(), CvError> {
        if !params.matches(self.shape.modes, nl) {
            return Err(CvError::LayerShape(self.shape.modes));
        }
        for step in layer_steps(self.shape, nl, params, None) {
            self.step(step);
        }
        Ok(())
    }

    /// Normalized per-mode expectation values.
    pub fn measure(&self, kind: Measurement) -> Result<Vec<Jet<D>>, CvError> {
        MeasureOp::forward::<D>(self.planes.clone(), self.shape, kind, None).map(|(o, _)| o)
    }

    /// Photon-number distribution of the value plane over `(n_a + n_b)`.
    pub fn mean_photons(&self, mode: usize) -> f64 {
        (0..self.shape.dim())
            .map(|b| {
                let p = self.planes.re[b].powi(2) + self.planes.im[b].powi(2);
                p * self.shape.digit(b, mode) as f64
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Value;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vals(v: &[Jet<0>]) -> Vec<f64> {
        v.iter().map(|j| j.v).collect()
    }

    #[test]
    fn parameter_counts() {
        let full = CvCircuit::new(CvConfig::default()).unwrap();
        assert_eq!(full.param_count(), 16);
        let pf = CvCircuit::new(CvConfig {
            parameterization: Parameterization::PhaseFree,
            ..CvConfig::default()
        })
        .unwrap();
        assert_eq!(pf.param_count(), 10);
        let ck = CvCircuit::new(CvConfig {
            nonlinearity: Nonlinearity::CrossKerr,
            ..CvConfig::default()
        })
        .unwrap();
        assert_eq!(ck.param_count(), 15);
    }

    #[test]
    fn displaced_vacuum_photon_number_and_quadrature() {
        let mut s = QuantumStateCv::<0>::vacuum(1, 20);
        s.displace(0, 0.5, 0.0).unwrap();
        assert!((vals(&s.measure(Measurement::Number).unwrap())[0] - 0.25).abs() < 1e-6);
        assert!((vals(&s.measure(Measurement::Quadrature).unwrap())[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn squeezed_vacuum() {
        let mut s = QuantumStateCv::<0>::vacuum(1, 20);
        s.squeeze(0, 0.3, 0.0).unwrap();
        let n = vals(&s.measure(Measurement::Number).unwrap())[0];
        assert!((n - 0.3f64.sinh().powi(2)).abs() < 1e-6);
        for k in (1..20).step_by(2) {
            assert_eq!(s.planes.re[k], 0.0);
            assert_eq!(s.planes.im[k], 0.0);
        }
    }

    #[test]
    fn balanced_beamsplitter_on_single_photon() {
        let mut s = QuantumStateCv::<0>::fock(&[1, 0], 20);
        s.beamsplitter(0, 1, std::f64::consts::FRAC_PI_4, 0.0).unwrap();
        let p = |i: usize| s.planes.re[i].powi(2) + s.planes.im[i].powi(2);
        assert!((p(20) - 0.5).abs() < 1e-12);
        assert!((p(1) - 0.5).abs() < 1e-12);
        assert_eq!(s.beamsplitter(1, 1, 0.1, 0.0), Err(CvError::SameMode));
    }

    #[test]
    fn vacuum_readouts_are_zero() {
        let s = QuantumStateCv::<0>::vacuum(2, 20);
        assert_eq!(vals(&s.measure(Measurement::Number).unwrap()), vec![0.0, 0.0]);
        assert_eq!(vals(&s.measure(Measurement::Quadrature).unwrap()), vec![0.0, 0.0]);
    }

    #[test]
    fn encoding_examples() {
        let s = QuantumStateCv::<0>::encode(&[Jet::constant(0.0); 2], 2, 20).unwrap();
        assert_eq!(s, QuantumStateCv::vacuum(2, 20));
        let s = QuantumStateCv::<0>::encode(&[Jet::constant(0.2), Jet::constant(0.0)], 2, 20).unwrap();
        let n = vals(&s.measure(Measurement::Number).unwrap());
        assert!((n[0] - 0.04).abs() < 1e-6);
        assert!(n[1].abs() < 1e-12);
        let s = QuantumStateCv::<1>::encode(&[Jet::variable(0.3, 0), Jet::constant(0.0)], 2, 20)
            .unwrap();
        let n = s.measure(Measurement::Number).unwrap();
        assert!((n[0].g[0] - 0.6).abs() < 1e-6);
        assert!(QuantumStateCv::<0>::encode(&[Jet::constant(0.1)], 2, 20).is_err());
    }

    #[test]
    fn zero_layer_is_identity() {
        let mut s = QuantumStateCv::<0>::encode(&[Jet::constant(0.3), Jet::constant(-0.1)], 2, 20)
            .unwrap();
        let before = s.clone();
        s.apply_layer(&CvLayerParams::zeros(2, Nonlinearity::Kerr), Nonlinearity::Kerr)
            .unwrap();
        for k in 0..before.planes.re.len() {
            assert!((s.planes.re[k] - before.planes.re[k]).abs() < 1e-14);
            assert!((s.planes.im[k] - before.planes.im[k]).abs() < 1e-14);
        }
        let bad = CvLayerParams::zeros(3, Nonlinearity::Kerr);
        assert_eq!(s.apply_layer(&bad, Nonlinearity::Kerr), Err(CvError::LayerShape(2)));
    }

    #[test]
    fn cross_kerr_needs_two_modes() {
        let mut s = QuantumStateCv::<0>::vacuum(1, 5);
        assert_eq!(
            s.apply_nonlinearity(Nonlinearity::CrossKerr, &[]),
            Err(CvError::CrossKerrNeedsTwoModes)
        );
    }

    #[test]
    fn kerr_and_cross_kerr_keep_photon_numbers() {
        let mut s = QuantumStateCv::<0>::encode(&[Jet::constant(0.4), Jet::constant(0.3)], 2, 20)
            .unwrap();
        s.beamsplitter(0, 1, 0.3, 0.2).unwrap();
        let before = vals(&s.measure(Measurement::Number).unwrap());
        s.kerr(0, 0.7).unwrap();
        s.cross_kerr(0, 1, -0.4).unwrap();
        let after = vals(&s.measure(Measurement::Number).unwrap());
        for (a, b) in after.iter().zip(&before) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn initialized_layer_keeps_norm_near_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for nl in Nonlinearity::ALL {
            let c = CvCircuit::new(CvConfig {
                nonlinearity: *nl,
                ..CvConfig::default()
            })
            .unwrap();
            let p = c.init_params(&mut rng);
            let mut s = QuantumStateCv::<0>::encode(&[Jet::constant(0.5), Jet::constant(-0.5)], 2, 20)
                .unwrap();
            s.apply_layer(&c.layer_params(&p, 0, 0), *nl).unwrap();
            let n = s.norm_sqr();
            assert!((0.99..=1.0 + 1e-12).contains(&n), "{nl}: {n}");
        }
    }

    fn readout(c: &CvCircuit, params: &[f64], x: &[f64], w: &[f64]) -> f64 {
        let steps = c.prepare(params, 0);
        let f = x.iter().map(|&v| Jet::<0>::constant(v)).collect();
        let (o, _) = c.forward(&steps, f, None).unwrap();
        o.iter().zip(w).map(|(o, w)| o.v * w).sum()
    }

    #[test]
    fn layer_parameter_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let configs = [
            (Measurement::Quadrature, Nonlinearity::Kerr, Parameterization::Full),
            (Measurement::Number, Nonlinearity::CubicPhase, Parameterization::Full),
            (Measurement::Quadrature, Nonlinearity::CrossKerr, Parameterization::PhaseFree),
        ];
        for (measurement, nonlinearity, parameterization) in configs {
            let c = CvCircuit::new(CvConfig {
                cutoff: 10,
                measurement,
                nonlinearity,
                parameterization,
                ..CvConfig::default()
            })
            .unwrap();
            // init scale is tiny; widen it so every gate matters
            let params: Vec<f64> = c.init_params(&mut rng).iter().map(|p| p * 50.0 + 0.05).collect();
            let x = [0.4, -0.3];
            let w = [0.7, -1.1];
            let steps = c.prepare(&params, 0);
            let mut tape = ParamTape::<0>::new();
            let f = x.iter().map(|&v| Jet::constant(v)).collect();
            c.forward(&steps, f, Some(&mut tape)).unwrap();
            let mut grad = vec![0.0; params.len()];
            tape.backward(&params, Value::Real(w.iter().map(|&v| Jet::constant(v)).collect()), &mut grad);
            for i in 0..params.len() {
                let h = 1e-6;
                let mut p = params.clone();
                p[i] += h;
                let mut m = params.clone();
                m[i] -= h;
                let fd = (readout(&c, &p, &x, &w) - readout(&c, &m, &x, &w)) / (2.0 * h);
                let err = (grad[i] - fd).abs() / fd.abs().max(1e-3);
                assert!(err < 1e-4, "{measurement} {nonlinearity} param {i}: {} vs {fd}", grad[i]);
            }
        }
    }
}

//! Statevector with jet-valued amplitudes.
//!
//! Qubit 0 is the most significant bit of the basis index.

use num_complex::Complex64 as C64;

use super::topology::{Gate, GateKind};
use super::DvError;
use crate::autodiff::{ComplexJet, Jet, Planes};

pub type Mat2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Single-qubit block of a gate and its derivative with respect to the angle.
/// Controlled gates use the same block on the control-set subspace.
pub fn gate_matrix(kind: GateKind, theta: f64) -> (Mat2, Mat2) {
    let (s, c) = (theta / 2.0).sin_cos();
    let i = C64::i();
    match kind {
        GateKind::RX | GateKind::CRX => (
            [[C64::from(c), -i * s], [-i * s, C64::from(c)]],
            [
                [C64::from(-s / 2.0), -i * (c / 2.0)],
                [-i * (c / 2.0), C64::from(-s / 2.0)],
            ],
        ),
        GateKind::RY => (
            [[C64::from(c), C64::from(-s)], [C64::from(s), C64::from(c)]],
            [
                [C64::from(-s / 2.0), C64::from(-c / 2.0)],
                [C64::from(c / 2.0), C64::from(-s / 2.0)],
            ],
        ),
        GateKind::RZ | GateKind::CRZ => {
            let e0 = C64::new(c, -s);
            let e1 = C64::new(c, s);
            (
                [[e0, ZERO], [ZERO, e1]],
                [[-i * e0 * 0.5, ZERO], [ZERO, i * e1 * 0.5]],
            )
        }
        GateKind::CNOT => ([[ZERO, ONE], [ONE, ZERO]], [[ZERO; 2]; 2]),
    }
}

pub fn dagger(m: &Mat2) -> Mat2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

#[inline]
pub(crate) fn bit_mask(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

/// Apply a single-qubit block to every plane, restricted to basis states with
/// the control bit set when a control is given.
pub(crate) fn apply_block(
    planes: &mut Planes,
    n_qubits: usize,
    control: Option<usize>,
    target: usize,
    m: &Mat2,
) {
    let dim = planes.dim;
    let tmask = bit_mask(n_qubits, target);
    let cmask = control.map_or(0, |c| bit_mask(n_qubits, c));
    for b in 0..dim {
        if b & tmask != 0 || b & cmask != cmask {
            continue;
        }
        let b1 = b | tmask;
        for k in 0..planes.ncomp {
            let (i0, i1) = (k * dim + b, k * dim + b1);
            let x0 = C64::new(planes.re[i0], planes.im[i0]);
            let x1 = C64::new(planes.re[i1], planes.im[i1]);
            let y0 = m[0][0] * x0 + m[0][1] * x1;
            let y1 = m[1][0] * x0 + m[1][1] * x1;
            planes.re[i0] = y0.re;
            planes.im[i0] = y0.im;
            planes.re[i1] = y1.re;
            planes.im[i1] = y1.im;
        }
    }
}

/// `Re <adj, (dM) x>` over all planes for a block applied as in
/// [`apply_block`].
pub(crate) fn block_sensitivity(
    x: &Planes,
    adj: &Planes,
    n_qubits: usize,
    control: Option<usize>,
    target: usize,
    dm: &Mat2,
) -> f64 {
    let dim = x.dim;
    let tmask = bit_mask(n_qubits, target);
    let cmask = control.map_or(0, |c| bit_mask(n_qubits, c));
    let mut acc = 0.0;
    for b in 0..dim {
        if b & tmask != 0 || b & cmask != cmask {
            continue;
        }
        let b1 = b | tmask;
        for k in 0..x.ncomp {
            let (i0, i1) = (k * dim + b, k * dim + b1);
            let x0 = C64::new(x.re[i0], x.im[i0]);
            let x1 = C64::new(x.re[i1], x.im[i1]);
            let a0 = C64::new(adj.re[i0], adj.im[i0]);
            let a1 = C64::new(adj.re[i1], adj.im[i1]);
            let y0 = dm[0][0] * x0 + dm[0][1] * x1;
            let y1 = dm[1][0] * x0 + dm[1][1] * x1;
            acc += (a0.conj() * y0 + a1.conj() * y1).re;
        }
    }
    acc
}

/// n-qubit state whose amplitudes carry derivatives with respect to `D`
/// input coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumStateDv<const D: usize> {
    pub n_qubits: usize,
    pub planes: Planes,
}

impl<const D: usize> QuantumStateDv<D> {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            planes: Planes::basis(Jet::<D>::NCOMP, 1 << n_qubits, 0),
        }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        Self {
            n_qubits,
            planes: Planes::basis(Jet::<D>::NCOMP, 1 << n_qubits, index),
        }
    }

    pub fn dim(&self) -> usize {
        self.planes.dim
    }

    pub fn amplitude(&self, b: usize) -> ComplexJet<D> {
        self.planes.get(b)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.planes.norm_sqr()
    }

    /// Apply a named gate. `qubits` is `[target]` for single-qubit gates and
    /// `[control, target]` for two-qubit gates.
    pub fn apply_gate(
        &mut self,
        kind: GateKind,
        qubits: &[usize],
        theta: Option<f64>,
    ) -> Result<(), DvError> {
        let arity = if kind.is_two_qubit() { 2 } else { 1 };
        if qubits.len() != arity {
            return Err(DvError::GateArity {
                expected: arity,
                got: qubits.len(),
            });
        }
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(DvError::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        if arity == 2 && qubits[0] == qubits[1] {
            return Err(DvError::DuplicateQubit(qubits[0]));
        }
        let theta = match (kind.is_parametric(), theta) {
            (true, Some(t)) => t,
            (true, None) => return Err(DvError::MissingAngle),
            (false, _) => 0.0,
        };
        let (m, _) = gate_matrix(kind, theta);
        let control = (arity == 2).then(|| qubits[0]);
        apply_block(&mut self.planes, self.n_qubits, control, qubits[arity - 1], &m);
        Ok(())
    }

    /// Apply a layout gate with its angle taken from `params`.
    pub fn apply_layout_gate(&mut self, gate: &Gate, params: &[f64]) -> Result<(), DvError> {
        let mut qubits = Vec::with_capacity(2);
        qubits.extend(gate.control);
        qubits.push(gate.target);
        self.apply_gate(gate.kind, &qubits, gate.param.map(|p| params[p]))
    }

    /// `RX(features[i])` on qubit `i` of `|0...0>`, built directly as the
    /// product state `prod_i (cos(f_i/2)|0> - i sin(f_i/2)|1>)`.
    pub fn angle_embed(features: &[Jet<D>], n_qubits: usize) -> Result<Self, DvError> {
        if features.len() != n_qubits {
            return Err(DvError::FeatureCount {
                expected: n_qubits,
                got: features.len(),
            });
        }
        let half: Vec<(Jet<D>, Jet<D>)> = features
            .iter()
            .map(|f| {
                let h = f.scale(0.5);
                (h.cos(), h.sin())
            })
            .collect();
        let mut planes = Planes::zeros(Jet::<D>::NCOMP, 1 << n_qubits);
        for b in 0..planes.dim {
            let mut p = Jet::constant(1.0);
            for (q, (c, s)) in half.iter().enumerate() {
                p = p * if b & bit_mask(n_qubits, q) != 0 { *s } else { *c };
            }
            let (pr, pi) = minus_i_power(b.count_ones());
            planes.set(b, &ComplexJet::new(p.scale(pr), p.scale(pi)));
        }
        Ok(Self { n_qubits, planes })
    }

    /// Zero-padded features divided by their Euclidean norm.
    pub fn amplitude_embed(features: &[Jet<D>], n_qubits: usize) -> Result<Self, DvError> {
        let dim = 1usize << n_qubits;
        if features.len() > dim {
            return Err(DvError::FeatureCount {
                expected: dim,
                got: features.len(),
            });
        }
        let (r, _) = amplitude_norm(features)?;
        let mut planes = Planes::zeros(Jet::<D>::NCOMP, dim);
        for (b, f) in features.iter().enumerate() {
            planes.set(b, &ComplexJet::new(*f * r, Jet::zero()));
        }
        Ok(Self { n_qubits, planes })
    }

    /// `<Z_i>` for every qubit.
    pub fn measure_pauli_z(&self) -> Vec<Jet<D>> {
        let mut out = vec![Jet::zero(); self.n_qubits];
        for b in 0..self.dim() {
            let p = self.amplitude(b).norm_sqr();
            for (q, o) in out.iter_mut().enumerate() {
                let sign = if b & bit_mask(self.n_qubits, q) != 0 { -1.0 } else { 1.0 };
                o.add_scaled(&p, sign);
            }
        }
        out
    }
}

/// `(-i)^k` as `(re, im)`.
pub(crate) fn minus_i_power(k: u32) -> (f64, f64) {
    match k % 4 {
        0 => (1.0, 0.0),
        1 => (0.0, -1.0),
        2 => (-1.0, 0.0),
        _ => (0.0, 1.0),
    }
}

/// `(1/sqrt(s), s)` with `s = sum f_i^2`, as jets.
pub(crate) fn amplitude_norm<const D: usize>(
    features: &[Jet<D>],
) -> Result<(Jet<D>, Jet<D>), DvError> {
    let mut s = Jet::zero();
    for f in features {
        s += *f * *f;
    }
    if s.v == 0.0 {
        return Err(DvError::DegenerateInput);
    }
    let (d0, d1, d2, _) = rsqrt_derivs(s.v);
    Ok((s.chain(d0, d1, d2), s))
}

/// `x^(-1/2)` and its first three derivatives.
pub(crate) fn rsqrt_derivs(x: f64) -> (f64, f64, f64, f64) {
    let r = 1.0 / x.sqrt();
    let r3 = r / x;
    let r5 = r3 / x;
    let r7 = r5 / x;
    (r, -0.5 * r3, 0.75 * r5, -1.875 * r7)
}

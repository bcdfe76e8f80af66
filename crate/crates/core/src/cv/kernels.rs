//! State-update kernels over component-major planes.
//!
//! Mode 0 is the most significant digit of the basis index. For a mode with
//! `inner = c^(m-1-mode)`, every plane splits into blocks of shape
//! `(c, inner)`; a single-mode operator multiplies each block from the left.

use super::fock::{BsBlock, CMat};
use crate::autodiff::Planes;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockShape {
    pub modes: usize,
    pub cutoff: usize,
}

impl FockShape {
    pub fn dim(&self) -> usize {
        self.cutoff.pow(self.modes as u32)
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.modes - 1 - mode) as u32)
    }

    pub fn digit(&self, basis: usize, mode: usize) -> usize {
        basis / self.stride(mode) % self.cutoff
    }
}

/// `out (+)= alpha * op(M) X` block-wise, `op` being `M` or `M^T`.
#[allow(clippy::too_many_arguments)]
fn gemm_mode(
    out: &mut [f64],
    x: &[f64],
    mat: &[f64],
    transpose: bool,
    alpha: f64,
    beta: f64,
    c: usize,
    inner: usize,
) {
    let nblocks = x.len() / (c * inner);
    let (ma_rs, ma_cs) = if transpose { (1, c as isize) } else { (c as isize, 1) };
    // SAFETY: all pointers stay inside their slices for the given shapes and strides.
    unsafe {
        if inner == 1 {
            // Y (R x c) = X (R x c) op(M)^T
            matrixmultiply::dgemm(
                nblocks,
                c,
                c,
                alpha,
                x.as_ptr(),
                c as isize,
                1,
                mat.as_ptr(),
                ma_cs,
                ma_rs,
                beta,
                out.as_mut_ptr(),
                c as isize,
                1,
            );
        } else {
            for b in 0..nblocks {
                let off = b * c * inner;
                matrixmultiply::dgemm(
                    c,
                    c,
                    inner,
                    alpha,
                    mat.as_ptr(),
                    ma_rs,
                    ma_cs,
                    x.as_ptr().add(off),
                    inner as isize,
                    1,
                    beta,
                    out.as_mut_ptr().add(off),
                    inner as isize,
                    1,
                );
            }
        }
    }
}

/// Apply `M` (or `M^dagger`) to one mode of every plane.
pub fn apply_mode(state: &Planes, shape: FockShape, mode: usize, m: &CMat, dagger: bool) -> Planes {
    let c = shape.cutoff;
    let inner = shape.stride(mode);
    let mut out = Planes::zeros(state.ncomp, state.dim);
    // M^dagger = Mr^T - i Mi^T
    let si = if dagger { -1.0 } else { 1.0 };
    gemm_mode(&mut out.re, &state.re, &m.re, dagger, 1.0, 0.0, c, inner);
    gemm_mode(&mut out.re, &state.im, &m.im, dagger, -si, 1.0, c, inner);
    gemm_mode(&mut out.im, &state.im, &m.re, dagger, 1.0, 0.0, c, inner);
    gemm_mode(&mut out.im, &state.re, &m.im, dagger, si, 1.0, c, inner);
    out
}

/// `C[p][q] = sum over blocks and columns of conj(adj[p, i]) x[q, i]`, so that
/// `Re <adj, (dM) x> = sum_pq Re(dM[p][q] C[p][q])`.
pub fn mode_correlation(x: &Planes, adj: &Planes, shape: FockShape, mode: usize) -> CMat {
    let c = shape.cutoff;
    let inner = shape.stride(mode);
    let mut out = CMat::zeros(c, c);
    let nblocks = x.re.len() / (c * inner);
    let terms: [(&[f64], &[f64], f64, bool); 4] = [
        (&adj.re, &x.re, 1.0, false),
        (&adj.im, &x.im, 1.0, false),
        (&adj.re, &x.im, 1.0, true),
        (&adj.im, &x.re, -1.0, true),
    ];
    for (a, xx, alpha, imag) in terms {
        let dst = if imag { &mut out.im } else { &mut out.re };
        // SAFETY: shapes and strides match the slice lengths.
        unsafe {
            if inner == 1 {
                // C (c x c) += A^T (c x R) X (R x c)
                matrixmultiply::dgemm(
                    c,
                    nblocks,
                    c,
                    alpha,
                    a.as_ptr(),
                    1,
                    c as isize,
                    xx.as_ptr(),
                    c as isize,
                    1,
                    1.0,
                    dst.as_mut_ptr(),
                    c as isize,
                    1,
                );
            } else {
                for b in 0..nblocks {
                    let off = b * c * inner;
                    // C (c x c) += A_b (c x inner) X_b^T (inner x c)
                    matrixmultiply::dgemm(
                        c,
                        inner,
                        c,
                        alpha,
                        a.as_ptr().add(off),
                        inner as isize,
                        1,
                        xx.as_ptr().add(off),
                        1,
                        inner as isize,
                        1.0,
                        dst.as_mut_ptr(),
                        c as isize,
                        1,
                    );
                }
            }
        }
    }
    out
}

/// `sum_pq Re(dM[p][q] C[p][q])`.
pub fn contract(dm: &CMat, corr: &CMat) -> f64 {
    let mut acc = 0.0;
    for k in 0..dm.re.len() {
        acc += dm.re[k] * corr.re[k] - dm.im[k] * corr.im[k];
    }
    acc
}

/// Basis indices whose digits on modes `a` and `b` are both zero.
fn rest_bases(shape: FockShape, a: usize, b: usize) -> Vec<usize> {
    (0..shape.dim())
        .filter(|&i| shape.digit(i, a) == 0 && shape.digit(i, b) == 0)
        .collect()
}

/// Apply beamsplitter blocks (or their adjoints) on modes `(a, b)`.
pub fn apply_bs(
    state: &Planes,
    shape: FockShape,
    a: usize,
    b: usize,
    blocks: &[BsBlock],
    dagger: bool,
) -> Planes {
    let (sa, sb) = (shape.stride(a), shape.stride(b));
    let mut out = Planes::zeros(state.ncomp, state.dim);
    let rest = rest_bases(shape, a, b);
    let mut xr = Vec::new();
    let mut xi = Vec::new();
    for k in 0..state.ncomp {
        let base_k = k * state.dim;
        for &r in &rest {
            for blk in blocks {
                let idx = |j: usize| {
                    let p = blk.lo + j;
                    base_k + r + p * sa + (blk.n - p) * sb
                };
                xr.clear();
                xi.clear();
                for j in 0..blk.size {
                    xr.push(state.re[idx(j)]);
                    xi.push(state.im[idx(j)]);
                }
                for i in 0..blk.size {
                    let (mut yr, mut yi) = (0.0, 0.0);
                    for j in 0..blk.size {
                        // element (i, j) of M or M^dagger
                        let (mr, mi) = if dagger {
                            let e = j * blk.size + i;
                            (blk.m.re[e], -blk.m.im[e])
                        } else {
                            let e = i * blk.size + j;
                            (blk.m.re[e], blk.m.im[e])
                        };
                        yr += mr * xr[j] - mi * xi[j];
                        yi += mr * xi[j] + mi * xr[j];
                    }
                    let o = idx(i);
                    out.re[o] = yr;
                    out.im[o] = yi;
                }
            }
        }
    }
    out
}

/// `(Re <adj, dB_theta x>, Re <adj, dB_phi x>)` for a beamsplitter.
pub fn bs_sensitivity(
    x: &Planes,
    adj: &Planes,
    shape: FockShape,
    a: usize,
    b: usize,
    blocks: &[BsBlock],
) -> (f64, f64) {
    let (sa, sb) = (shape.stride(a), shape.stride(b));
    let rest = rest_bases(shape, a, b);
    let (mut gt, mut gp) = (0.0, 0.0);
    for blk in blocks {
        let mut corr = CMat::zeros(blk.size, blk.size);
        for k in 0..x.ncomp {
            let base_k = k * x.dim;
            for &r in &rest {
                let idx = |j: usize| {
                    let p = blk.lo + j;
                    base_k + r + p * sa + (blk.n - p) * sb
                };
                for i in 0..blk.size {
                    let (ar, ai) = (adj.re[idx(i)], adj.im[idx(i)]);
                    for j in 0..blk.size {
                        let (xr, xi) = (x.re[idx(j)], x.im[idx(j)]);
                        let e = i * blk.size + j;
                        corr.re[e] += ar * xr + ai * xi;
                        corr.im[e] += ar * xi - ai * xr;
                    }
                }
            }
        }
        gt += contract(&blk.d_theta, &corr);
        gp += contract(&blk.d_phi, &corr);
    }
    (gt, gp)
}

/// Multiply every plane by `exp(i * kappa * w[basis])` (or its conjugate).
pub fn apply_diag(state: &Planes, w: &[f64], kappa: f64, conj: bool) -> Planes {
    let sign = if conj { -1.0 } else { 1.0 };
    let phases: Vec<(f64, f64)> = w.iter().map(|&x| (sign * kappa * x).sin_cos()).collect();
    let mut out = state.clone();
    for k in 0..state.ncomp {
        let base = k * state.dim;
        for (i, &(s, c)) in phases.iter().enumerate() {
            let (xr, xi) = (state.re[base + i], state.im[base + i]);
            out.re[base + i] = c * xr - s * xi;
            out.im[base + i] = s * xr + c * xi;
        }
    }
    out
}

/// `Re <adj, i w y>` where `y` is the diagonal gate's output.
pub fn diag_sensitivity(y: &Planes, adj: &Planes, w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..y.ncomp {
        let base = k * y.dim;
        for (i, &wi) in w.iter().enumerate() {
            // Re(conj(a) * i * y) = a_i y_r - a_r y_i
            acc += wi * (adj.im[base + i] * y.re[base + i] - adj.re[base + i] * y.im[base + i]);
        }
    }
    acc
}

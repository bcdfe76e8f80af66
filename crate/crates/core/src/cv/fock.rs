//! Truncated Fock-basis matrix elements of the CV gates.
//!
//! Displacement and squeezing use closed recurrences on the exact matrix
//! elements, so the truncated matrix equals the top-left block of the
//! infinite operator. Their parameter derivatives come from the generator
//! identities `dD/dr = (a^dag - a) D` and `dS/dr = (a^2 - a^dag^2)/2 S`,
//! which need a few rows beyond the cutoff.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

/// Dense complex matrix, row-major, split into real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            re: vec![0.0; rows * cols],
            im: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.re[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        let k = r * self.cols + c;
        C64::new(self.re[k], self.im[k])
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, z: C64) {
        let k = r * self.cols + c;
        self.re[k] = z.re;
        self.im[k] = z.im;
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c))
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out.set(r, c, m[(r, c)]);
            }
        }
        out
    }

    /// Multiply element `(r, c)` by `exp(i * w(r, c) * phi)`.
    fn phased(real: &[f64], rows: usize, cols: usize, phi: f64, w: impl Fn(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let x = real[r * cols + c];
                let (s, co) = (w(r, c) * phi).sin_cos();
                out.re[r * cols + c] = x * co;
                out.im[r * cols + c] = x * s;
            }
        }
        out
    }

    /// `i * w(r, c) * self(r, c)`.
    fn times_i_weight(&self, w: impl Fn(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let k = r * self.cols + c;
                let f = w(r, c);
                out.re[k] = -f * self.im[k];
                out.im[k] = f * self.re[k];
            }
        }
        out
    }
}

/// A gate matrix together with its derivatives with respect to each of its
/// real arguments, in argument order.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMats {
    pub m: CMat,
    pub d: Vec<CMat>,
}

fn sq(n: usize) -> f64 {
    (n as f64).sqrt()
}

/// Real displacement elements `<m|D(r)|n>` for `m <= rows - 1`, `n < cols`.
fn displacement_real(r: f64, rows: usize, cols: usize) -> Vec<f64> {
    let mut d = vec![0.0; rows * cols];
    d[0] = (-0.5 * r * r).exp();
    for m in 1..rows {
        d[m * cols] = r / sq(m) * d[(m - 1) * cols];
    }
    for n in 1..cols {
        for m in 0..rows {
            let up = if m > 0 { sq(m) * d[(m - 1) * cols + n - 1] } else { 0.0 };
            d[m * cols + n] = (up - r * d[m * cols + n - 1]) / sq(n);
        }
    }
    d
}

/// `D(r, phi)` on `c` levels with derivatives in `(r, phi)`.
pub fn displacement(r: f64, phi: f64, c: usize) -> GateMats {
    let ext = displacement_real(r, c + 1, c);
    let mut dr = vec![0.0; c * c];
    for m in 0..c {
        for n in 0..c {
            let down = if m > 0 { sq(m) * ext[(m - 1) * c + n] } else { 0.0 };
            dr[m * c + n] = down - sq(m + 1) * ext[(m + 1) * c + n];
        }
    }
    let w = |m: usize, n: usize| m as f64 - n as f64;
    let m = CMat::phased(&ext[..c * c], c, c, phi, w);
    let dphi = m.times_i_weight(w);
    GateMats {
        d: vec![CMat::phased(&dr, c, c, phi, w), dphi],
        m,
    }
}

/// Real squeezing elements `<m|S(r)|n>` for `m < rows`, `n < cols`.
fn squeezing_real(r: f64, rows: usize, cols: usize) -> Vec<f64> {
    let t = r.tanh();
    let sech = 1.0 / r.cosh();
    let mut s = vec![0.0; rows * cols];
    s[0] = sech.sqrt();
    for m in (2..rows).step_by(2) {
        s[m * cols] = -(((m - 1) as f64) / m as f64).sqrt() * t * s[(m - 2) * cols];
    }
    for n in 1..cols {
        for m in 0..rows {
            let a = if m > 0 { sq(m) * sech * s[(m - 1) * cols + n - 1] } else { 0.0 };
            let b = if n > 1 { sq(n - 1) * t * s[m * cols + n - 2] } else { 0.0 };
            s[m * cols + n] = (a + b) / sq(n);
        }
    }
    s
}

/// `S(r, phi) = exp((r e^{-i phi} a^2 - r e^{i phi} a^dag^2) / 2)` on `c`
/// levels with derivatives in `(r, phi)`.
pub fn squeezing(r: f64, phi: f64, c: usize) -> GateMats {
    let ext = squeezing_real(r, c + 2, c);
    let mut dr = vec![0.0; c * c];
    for m in 0..c {
        for n in 0..c {
            let lower = sq((m + 1) * (m + 2)) * ext[(m + 2) * c + n];
            let upper = if m >= 2 { sq(m * (m - 1)) * ext[(m - 2) * c + n] } else { 0.0 };
            dr[m * c + n] = 0.5 * (lower - upper);
        }
    }
    let w = |m: usize, n: usize| 0.5 * (m as f64 - n as f64);
    let m = CMat::phased(&ext[..c * c], c, c, phi, w);
    let dphi = m.times_i_weight(w);
    GateMats {
        d: vec![CMat::phased(&dr, c, c, phi, w), dphi],
        m,
    }
}

/// `q^3 / 3` restricted to `c` levels, with `q = a + a^dag`.
pub fn cubic_generator(c: usize) -> DMatrix<f64> {
    let n = c + 3;
    let q = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j {
            sq(j)
        } else if j + 1 == i {
            sq(i)
        } else {
            0.0
        }
    });
    let q3 = &q * &q * &q;
    q3.view((0, 0), (c, c)).into_owned() / 3.0
}

/// `exp(i gamma Q)` for the truncated cubic generator `Q`, via its
/// eigendecomposition, with derivative `i Q U`.
pub fn cubic_phase(gamma: f64, c: usize) -> GateMats {
    let qm = cubic_generator(c);
    let eig = SymmetricEigen::new(qm.clone());
    let v = eig.eigenvectors.map(C64::from);
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, gamma * l)));
    let u = &v * phases * v.transpose();
    let du = qm.map(|x| C64::new(0.0, x)) * &u;
    GateMats {
        m: CMat::from_nalgebra(&u),
        d: vec![CMat::from_nalgebra(&du)],
    }
}

/// Photon-number block of a two-mode beamsplitter restricted to the cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct BsBlock {
    /// Total photon number of the block.
    pub n: usize,
    /// Smallest first-mode occupation inside the cutoff.
    pub lo: usize,
    /// Block side length.
    pub size: usize,
    pub m: CMat,
    pub d_theta: CMat,
    pub d_phi: CMat,
}

/// Beamsplitter `exp(theta (e^{i phi} a b^dag - e^{-i phi} a^dag b))` as
/// blocks of constant total photon number, each indexed by the first-mode
/// occupation. Blocks are computed in full and then truncated to `c` levels
/// per mode.
pub fn beamsplitter(theta: f64, phi: f64, c: usize) -> Vec<BsBlock> {
    let (s, co) = theta.sin_cos();
    let n_max = 2 * c - 2;
    // full[n][k * (n + 1) + p']: column k of block n
    let mut full: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    full.push(vec![1.0]);
    for n in 1..=n_max {
        let size = n + 1;
        let mut blk = vec![0.0; size * size];
        let prev = &full[n - 1];
        for k in 0..=n {
            let l = n - k;
            // raise from column (k-1, l) with (cos a^dag + sin b^dag) / sqrt(k),
            // or from column (0, l-1) with (-sin a^dag + cos b^dag) / sqrt(l)
            let (src, ca, cb, norm) = if k > 0 {
                (k - 1, co, s, sq(k))
            } else {
                (0, -s, co, sq(l))
            };
            for pp in 0..=n {
                let from_a = if pp > 0 { sq(pp) * prev[src * n + pp - 1] } else { 0.0 };
                let from_b = if pp < n { sq(n - pp) * prev[src * n + pp] } else { 0.0 };
                blk[k * size + pp] = (ca * from_a + cb * from_b) / norm;
            }
        }
        full.push(blk);
    }
    let mut out = Vec::with_capacity(n_max + 1);
    for (n, blk) in full.iter().enumerate() {
        let size_full = n + 1;
        let lo = n.saturating_sub(c - 1);
        let hi = n.min(c - 1);
        let size = hi - lo + 1;
        let mut b0 = vec![0.0; size * size];
        let mut db0 = vec![0.0; size * size];
        for (j, k) in (lo..=hi).enumerate() {
            let col = &blk[k * size_full..(k + 1) * size_full];
            for (i, pp) in (lo..=hi).enumerate() {
                b0[i * size + j] = col[pp];
                let up = if pp < n { sq(pp + 1) * sq(n - pp) * col[pp + 1] } else { 0.0 };
                let down = if pp > 0 { sq(pp) * sq(n - pp + 1) * col[pp - 1] } else { 0.0 };
                db0[i * size + j] = up - down;
            }
        }
        // phase exp(i phi (q' - q)) with q = n - p
        let w = |i: usize, j: usize| j as f64 - i as f64;
        let m = CMat::phased(&b0, size, size, phi, w);
        let d_phi = m.times_i_weight(w);
        out.push(BsBlock {
            n,
            lo,
            size,
            d_theta: CMat::phased(&db0, size, size, phi, w),
            d_phi,
            m,
        });
    }
    out
}

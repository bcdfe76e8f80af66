use super::{ComplexJet, Jet};

/// Complex state whose amplitudes are jets, stored component-major.
///
/// Entry `(comp, basis)` lives at `comp * dim + basis` in both `re` and `im`.
/// Component 0 is the value plane; the rest are derivative planes. Operators
/// that do not depend on the inputs act on every plane independently.
#[derive(Clone, Debug, PartialEq)]
pub struct Planes {
    pub ncomp: usize,
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Planes {
    pub fn zeros(ncomp: usize, dim: usize) -> Self {
        Self {
            ncomp,
            dim,
            re: vec![0.0; ncomp * dim],
            im: vec![0.0; ncomp * dim],
        }
    }

    /// Basis state `index` with no input dependence.
    pub fn basis(ncomp: usize, dim: usize, index: usize) -> Self {
        let mut p = Self::zeros(ncomp, dim);
        p.re[index] = 1.0;
        p
    }

    pub fn get<const D: usize>(&self, basis: usize) -> ComplexJet<D> {
        debug_assert_eq!(self.ncomp, Jet::<D>::NCOMP);
        let mut re = Jet::zero();
        let mut im = Jet::zero();
        for k in 0..self.ncomp {
            re.set_comp(k, self.re[k * self.dim + basis]);
            im.set_comp(k, self.im[k * self.dim + basis]);
        }
        ComplexJet::new(re, im)
    }

    pub fn set<const D: usize>(&mut self, basis: usize, z: &ComplexJet<D>) {
        for k in 0..self.ncomp {
            self.re[k * self.dim + basis] = z.re.comp(k);
            self.im[k * self.dim + basis] = z.im.comp(k);
        }
    }

    /// Squared norm of the value plane.
    pub fn norm_sqr(&self) -> f64 {
        self.re[..self.dim]
            .iter()
            .zip(&self.im[..self.dim])
            .map(|(r, i)| r * r + i * i)
            .sum()
    }

    /// `Re <self, other>` summed over all planes.
    pub fn real_inner(&self, other: &Planes) -> f64 {
        let a: f64 = self.re.iter().zip(&other.re).map(|(x, y)| x * y).sum();
        let b: f64 = self.im.iter().zip(&other.im).map(|(x, y)| x * y).sum();
        a + b
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().chain(&self.im).all(|x| x.is_finite())
    }
}

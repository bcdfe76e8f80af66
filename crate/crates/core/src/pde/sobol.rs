//! Gray-code Sobol sequence in up to three dimensions.
//!
//! Direction numbers follow Joe and Kuo: dimension 1 is van der Corput,
//! dimension 2 has `s = 1, a = 0, m = [1]`, dimension 3 has
//! `s = 2, a = 1, m = [1, 3]`. The all-zeros point is skipped.

use super::PdeError;

const BITS: usize = 32;

/// Primitive polynomial degree, coefficients and initial direction numbers.
const PARAMS: [(usize, u32, &[u32]); 2] = [(1, 0, &[1]), (2, 1, &[1, 3])];

#[derive(Clone, Debug)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    shift: Vec<u32>,
    index: u64,
}

fn directions(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, d) in v.iter_mut().enumerate() {
            *d = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = PARAMS[dim - 1];
    for k in 0..s {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

impl Sobol {
    pub fn new(dims: usize) -> Result<Self, PdeError> {
        Self::with_shift(vec![0; dims])
    }

    /// Digitally shifted sequence: every point is XOR-ed with `shift`.
    pub fn with_shift(shift: Vec<u32>) -> Result<Self, PdeError> {
        let dims = shift.len();
        if dims == 0 || dims > 3 {
            return Err(PdeError::SobolDimension(dims));
        }
        Ok(Self {
            directions: (0..dims).map(directions).collect(),
            state: vec![0; dims],
            shift,
            index: 0,
        })
    }

    pub fn dims(&self) -> usize {
        self.state.len()
    }

    /// Next point in `[0, 1)^dims`.
    pub fn next_point(&mut self) -> Vec<f64> {
        let c = self.index.trailing_ones() as usize;
        self.index += 1;
        for (s, d) in self.state.iter_mut().zip(&self.directions) {
            *s ^= d[c];
        }
        self.state
            .iter()
            .zip(&self.shift)
            .map(|(&s, &h)| (s ^ h) as f64 / (1u64 << BITS) as f64)
            .collect()
    }
}

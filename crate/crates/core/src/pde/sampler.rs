//! Collocation point sampling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PdeError, PdeProblem, Region, Sobol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingStrategy {
    Uniform,
    Sobol,
}

impl SamplingStrategy {
    pub fn name(self) -> &'static str {
        match self {
            SamplingStrategy::Uniform => "uniform",
            SamplingStrategy::Sobol => "sobol",
        }
    }

    /// Sobol for Cavity, uniform elsewhere.
    pub fn default_for(problem: &PdeProblem) -> Self {
        if problem.kind == super::ProblemKind::Cavity {
            SamplingStrategy::Sobol
        } else {
            SamplingStrategy::Uniform
        }
    }
}

impl fmt::Display for SamplingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplingStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(SamplingStrategy::Uniform),
            "sobol" => Ok(SamplingStrategy::Sobol),
            _ => Err(format!("unknown sampling strategy {s:?}")),
        }
    }
}

/// Points per role, in the order of `PdeProblem::roles`.
#[derive(Clone, Debug, PartialEq)]
pub struct CollocationBatch {
    pub roles: Vec<Vec<Vec<f64>>>,
}

impl CollocationBatch {
    pub fn len(&self) -> usize {
        self.roles.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Stateful sampler: successive batches continue the same streams.
#[derive(Clone, Debug)]
pub struct BatchSampler {
    problem: PdeProblem,
    strategy: SamplingStrategy,
    rng: ChaCha8Rng,
    sobol: Vec<Sobol>,
}

impl BatchSampler {
    pub fn new(problem: &PdeProblem, strategy: SamplingStrategy, seed: u64) -> Result<Self, PdeError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sobol = Vec::new();
        if strategy == SamplingStrategy::Sobol {
            for role in &problem.roles {
                let dims = match role.region {
                    Region::Interior => problem.d_in,
                    Region::Faces(_) => problem.d_in - 1,
                };
                let shift = (0..dims).map(|_| rng.random()).collect();
                sobol.push(Sobol::with_shift(shift)?);
            }
        }
        Ok(Self {
            problem: problem.clone(),
            strategy,
            rng,
            sobol,
        })
    }

    fn unit(&mut self, role: usize, dims: usize) -> Vec<f64> {
        match self.strategy {
            SamplingStrategy::Uniform => (0..dims).map(|_| self.rng.random::<f64>()).collect(),
            SamplingStrategy::Sobol => self.sobol[role].next_point(),
        }
    }

    fn point(&mut self, role: usize) -> Vec<f64> {
        let p = &self.problem;
        let (lo, hi, d) = (p.lo.clone(), p.hi.clone(), p.d_in);
        let scale = |k: usize, u: f64| lo[k] + (hi[k] - lo[k]) * u;
        match self.problem.roles[role].region.clone() {
            Region::Interior => {
                let u = self.unit(role, d);
                (0..d).map(|k| scale(k, u[k])).collect()
            }
            Region::Faces(faces) => {
                let (axis, value) = faces[self.rng.random_range(0..faces.len())];
                let u = self.unit(role, d - 1);
                let mut free = u.into_iter();
                (0..d)
                    .map(|k| if k == axis { value } else { scale(k, free.next().expect("d - 1 free coordinates")) })
                    .collect()
            }
        }
    }

    /// `size` points for every role.
    pub fn next_batch(&mut self, size: usize) -> CollocationBatch {
        let roles = (0..self.problem.roles.len())
            .map(|r| (0..size).map(|_| self.point(r)).collect())
            .collect();
        CollocationBatch { roles }
    }
}

pub fn sample_batch(
    problem: &PdeProblem,
    strategy: SamplingStrategy,
    seed: u64,
    size: usize,
) -> Result<CollocationBatch, PdeError> {
    Ok(BatchSampler::new(problem, strategy, seed)?.next_batch(size))
}

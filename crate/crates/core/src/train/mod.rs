//! Optimization loop, run records and multi-run statistics.
//!
//! One epoch is one Adam step on one batch per role. The scheduler observes
//! every epoch's total loss.

mod optim;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use optim::{clip_gradients, l2_norm, Adam, Plateau, PlateauConfig, BETA1, BETA2, EPSILON};

use crate::nn::{Core, HybridModel};
use crate::pde::{evaluate_loss, field_errors, BatchSampler, FieldError, PdeError, PdeProblem, ReferenceGrid, SamplingStrategy};
use crate::telemetry;

/// Runs abort when the CV state keeps less than this squared norm.
pub const MIN_CV_NORM: f64 = 0.5;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite gradient component {index}: {value}")]
    NonFiniteGradient { index: usize, value: f64 },
    #[error("length mismatch: {params} params, {grads} grads, {state} optimizer slots")]
    Length {
        params: usize,
        grads: usize,
        state: usize,
    },
    #[error("initial parameters have length {got}, model needs {expected}")]
    InitialParams { expected: usize, got: usize },
    #[error("n_runs must be at least 1")]
    NoRuns,
    #[error(transparent)]
    Pde(#[from] PdeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub clip: f64,
    pub scheduler: PlateauConfig,
    pub seed: u64,
    /// `None` picks Sobol for Cavity and uniform elsewhere.
    pub sampling: Option<SamplingStrategy>,
    /// Reuse the first batch every epoch.
    pub fixed_batch: bool,
}

impl TrainConfig {
    /// Defaults for DV and classical models.
    pub fn dv() -> Self {
        Self {
            epochs: 2000,
            batch_size: 64,
            lr: 0.005,
            clip: 1.0,
            scheduler: PlateauConfig {
                factor: 0.9,
                patience: 1000,
                min_lr: 1e-6,
            },
            seed: 0,
            sampling: None,
            fixed_batch: false,
        }
    }

    pub fn cv() -> Self {
        Self {
            lr: 1e-4,
            clip: 0.1,
            scheduler: PlateauConfig {
                factor: 0.5,
                patience: 20,
                min_lr: 1e-6,
            },
            ..Self::dv()
        }
    }

    pub fn for_model(model: &HybridModel) -> Self {
        match model.core {
            Core::Cv(_) => Self::cv(),
            _ => Self::dv(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub total: f64,
    pub terms: Vec<f64>,
    pub lr: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub term_names: Vec<String>,
    pub history: Vec<EpochRecord>,
    /// Mean wall time per epoch in seconds.
    pub time_per_iter: f64,
    /// Allocator high-water mark, when the counting allocator is installed.
    pub peak_memory_bytes: Option<u64>,
    pub final_params: Vec<f64>,
    /// Reason the run stopped early.
    pub aborted: Option<String>,
}

impl RunRecord {
    pub fn final_loss(&self) -> Option<f64> {
        self.history.last().map(|e| e.total)
    }
}

/// Optimize `model` on `problem`; parameters start from `initial` or from a
/// seeded initialization. Numerical failures stop the run and are recorded
/// in [`RunRecord::aborted`].
pub fn train(
    model: &HybridModel,
    problem: &PdeProblem,
    config: &TrainConfig,
    initial: Option<Vec<f64>>,
) -> Result<RunRecord, TrainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = model.init_params(&mut rng);
    let mut params = match initial {
        Some(p) if p.len() != model.param_count() => {
            return Err(TrainError::InitialParams {
                expected: model.param_count(),
                got: p.len(),
            })
        }
        Some(p) => p,
        None => init,
    };
    let strategy = config
        .sampling
        .unwrap_or_else(|| SamplingStrategy::default_for(problem));
    let mut sampler = BatchSampler::new(problem, strategy, config.seed.wrapping_add(0x5eed))?;
    let mut adam = Adam::new(params.len());
    let mut sched = Plateau::new(config.lr, config.scheduler);
    let mut history = Vec::with_capacity(config.epochs);
    let mut aborted = None;
    let fixed = config.fixed_batch.then(|| sampler.next_batch(config.batch_size));

    telemetry::reset_peak();
    let start = Instant::now();
    for epoch in 0..config.epochs {
        let batch = match &fixed {
            Some(b) => b.clone(),
            None => sampler.next_batch(config.batch_size),
        };
        let eval = evaluate_loss(problem, model, &params, &batch, true)?;
        if let Some(n) = eval.min_cv_norm {
            if n < MIN_CV_NORM {
                aborted = Some(PdeError::NormCollapse(n).to_string());
                break;
            }
        }
        if !eval.total.is_finite() {
            aborted = Some(format!("non-finite loss {} at epoch {epoch}", eval.total));
            break;
        }
        let mut grad = eval.grad.expect("gradient requested");
        let lr = sched.lr;
        let grad_norm = clip_gradients(&mut grad, config.clip);
        history.push(EpochRecord {
            epoch,
            total: eval.total,
            terms: eval.terms.iter().map(|t| t.1).collect(),
            lr,
            grad_norm,
        });
        if let Err(e) = adam.step(&mut params, &grad, lr) {
            aborted = Some(format!("{e} at epoch {epoch}"));
            break;
        }
        sched.step(eval.total);
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(RunRecord {
        seed: config.seed,
        term_names: problem.terms.iter().map(|t| t.name.to_string()).collect(),
        time_per_iter: if history.is_empty() { 0.0 } else { elapsed / history.len() as f64 },
        history,
        peak_memory_bytes: telemetry::peak_bytes(),
        final_params: params,
        aborted,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
}

impl Stats {
    /// Welford accumulation, so identical values give exactly zero spread.
    pub fn of(values: &[f64]) -> Self {
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (k, &x) in values.iter().enumerate() {
            let d = x - mean;
            mean += d / (k + 1) as f64;
            m2 += d * (x - mean);
        }
        let std = if values.len() < 2 {
            0.0
        } else {
            (m2 / (values.len() - 1) as f64).sqrt()
        };
        Self { mean, std }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub record: RunRecord,
    /// Relative L2 per field; empty when no reference is available or the
    /// run aborted.
    pub errors: Vec<FieldError>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiRunSummary {
    pub runs: Vec<RunOutcome>,
    pub final_loss: Option<Stats>,
    pub l2: Vec<(String, Stats)>,
    pub time_per_iter: Stats,
}

/// `n_runs` independent runs with seeds `config.seed + i`, executed in
/// parallel. Statistics cover runs that finished without aborting.
pub fn multi_run(
    model: &HybridModel,
    problem: &PdeProblem,
    config: &TrainConfig,
    n_runs: usize,
    reference: Option<&ReferenceGrid>,
) -> Result<MultiRunSummary, TrainError> {
    if n_runs == 0 {
        return Err(TrainError::NoRuns);
    }
    let can_score = problem.has_exact() || reference.is_some();
    let runs: Vec<RunOutcome> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let cfg = TrainConfig {
                seed: config.seed.wrapping_add(i as u64),
                ..*config
            };
            let record = train(model, problem, &cfg, None)?;
            let errors = if can_score && record.aborted.is_none() {
                field_errors(problem, model, &record.final_params, reference)?
            } else {
                Vec::new()
            };
            Ok(RunOutcome { record, errors })
        })
        .collect::<Result<_, TrainError>>()?;
    let ok: Vec<&RunOutcome> = runs.iter().filter(|r| r.record.aborted.is_none()).collect();
    let losses: Vec<f64> = ok.iter().filter_map(|r| r.record.final_loss()).collect();
    let l2 = if ok.is_empty() || ok[0].errors.is_empty() {
        Vec::new()
    } else {
        problem
            .fields
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let v: Vec<f64> = ok.iter().map(|r| r.errors[k].l2).collect();
                (f.to_string(), Stats::of(&v))
            })
            .collect()
    };
    let times: Vec<f64> = runs.iter().map(|r| r.record.time_per_iter).collect();
    Ok(MultiRunSummary {
        final_loss: (!losses.is_empty()).then(|| Stats::of(&losses)),
        l2,
        time_per_iter: Stats::of(&times),
        runs,
    })
}

//! TOML experiment and sweep configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qcpinn::cv::{CvConfig, Measurement, Nonlinearity, Parameterization};
use qcpinn::dv::{Embedding, TopologyKind};
use qcpinn::nn::{Architecture, Baseline, HybridModel, ModelSpec};
use qcpinn::pde::{PdeProblem, ProblemKind, SamplingStrategy};
use qcpinn::train::TrainConfig;

use crate::BenchError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Dv,
    Cv,
    #[serde(rename = "classical-1")]
    #[value(name = "classical-1")]
    Classical1,
    #[serde(rename = "classical-2")]
    #[value(name = "classical-2")]
    Classical2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 2000 epochs, 3 runs.
    Desk,
    /// 20000 epochs, 10 runs.
    Paper,
}

impl Preset {
    pub fn epochs(self) -> usize {
        match self {
            Preset::Desk => 2000,
            Preset::Paper => 20000,
        }
    }

    pub fn n_runs(self) -> usize {
        match self {
            Preset::Desk => 3,
            Preset::Paper => 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvOptions {
    pub modes: usize,
    pub cutoff: usize,
    pub layers: usize,
    pub measurement: Measurement,
    pub nonlinearity: Nonlinearity,
    pub parameterization: Parameterization,
}

impl Default for CvOptions {
    fn default() -> Self {
        let c = CvConfig::default();
        Self {
            modes: c.modes,
            cutoff: c.cutoff,
            layers: c.layers,
            measurement: c.measurement,
            nonlinearity: c.nonlinearity,
            parameterization: c.parameterization,
        }
    }
}

/// Fully resolved experiment; this is what summaries echo back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub model: ModelKind,
    pub embedding: Embedding,
    pub topology: TopologyKind,
    pub qubits: usize,
    pub layers: usize,
    pub cv: CvOptions,
    pub epochs: usize,
    pub batch: usize,
    pub n_runs: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub reference: Option<PathBuf>,
    pub lr: Option<f64>,
    pub clip: Option<f64>,
    pub sampling: Option<SamplingStrategy>,
    /// Time slice for heatmaps of time-dependent 2D problems; defaults to
    /// the end of the time interval.
    pub render_time: Option<f64>,
}

/// Config file contents; absent keys fall back to the preset and defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: Option<ProblemKind>,
    pub model: Option<ModelKind>,
    pub embedding: Option<Embedding>,
    pub topology: Option<TopologyKind>,
    pub qubits: Option<usize>,
    pub layers: Option<usize>,
    pub cv: Option<CvOptions>,
    pub preset: Option<Preset>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub n_runs: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub lr: Option<f64>,
    pub clip: Option<f64>,
    pub sampling: Option<SamplingStrategy>,
    pub render_time: Option<f64>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),+) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )+
    };
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Keys set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &ConfigFile) -> Self {
        overlay!(
            self, top, problem, model, embedding, topology, qubits, layers, cv, preset, epochs, batch,
            n_runs, seed, output, reference, lr, clip, sampling, render_time
        );
        self
    }

    /// Layer command-line values over this file. A preset given on the
    /// command line replaces the file's epoch and run counts.
    pub fn apply_overrides(mut self, cli: &ConfigFile) -> Self {
        if cli.preset.is_some() {
            self.epochs = None;
            self.n_runs = None;
        }
        self.overlay(cli)
    }

    pub fn resolve(&self) -> Result<ExperimentConfig, BenchError> {
        let preset = self.preset.unwrap_or(Preset::Desk);
        let problem = self
            .problem
            .ok_or_else(|| BenchError::Config("missing `problem`".into()))?;
        let model = self
            .model
            .ok_or_else(|| BenchError::Config("missing `model`".into()))?;
        let cfg = ExperimentConfig {
            problem,
            model,
            embedding: self.embedding.unwrap_or(Embedding::Angle),
            topology: self.topology.unwrap_or(TopologyKind::Cascade),
            qubits: self.qubits.unwrap_or(5),
            layers: self.layers.unwrap_or(1),
            cv: self.cv.unwrap_or_default(),
            epochs: self.epochs.unwrap_or(preset.epochs()),
            batch: self.batch.unwrap_or(64),
            n_runs: self.n_runs.unwrap_or(preset.n_runs()),
            seed: self.seed.unwrap_or(0),
            output: self
                .output
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}-{}", problem.name(), model_slug(model)))),
            reference: self.reference.clone(),
            lr: self.lr,
            clip: self.clip,
            sampling: self.sampling,
            render_time: self.render_time,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn model_slug(m: ModelKind) -> &'static str {
    match m {
        ModelKind::Dv => "dv",
        ModelKind::Cv => "cv",
        ModelKind::Classical1 => "classical-1",
        ModelKind::Classical2 => "classical-2",
    }
}

impl ExperimentConfig {
    pub fn problem(&self) -> PdeProblem {
        PdeProblem::new(self.problem)
    }

    pub fn model_spec(&self) -> ModelSpec {
        let p = self.problem();
        let architecture = match self.model {
            ModelKind::Dv => Architecture::Dv {
                topology: self.topology,
                embedding: self.embedding,
                qubits: self.qubits,
                layers: self.layers,
            },
            ModelKind::Cv => Architecture::Cv {
                config: CvConfig {
                    modes: self.cv.modes,
                    cutoff: self.cv.cutoff,
                    layers: self.cv.layers,
                    measurement: self.cv.measurement,
                    nonlinearity: self.cv.nonlinearity,
                    parameterization: self.cv.parameterization,
                },
            },
            ModelKind::Classical1 => Architecture::Classical {
                baseline: Baseline::Model1,
            },
            ModelKind::Classical2 => Architecture::Classical {
                baseline: Baseline::Model2,
            },
        };
        ModelSpec {
            n_in: p.d_in,
            n_out: p.d_out,
            architecture,
        }
    }

    pub fn build_model(&self) -> Result<HybridModel, BenchError> {
        HybridModel::new(self.model_spec()).map_err(|e| BenchError::Config(e.to_string()))
    }

    /// Every check that does not need compute.
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.batch == 0 {
            return bad("`batch` must be at least 1");
        }
        if self.n_runs == 0 {
            return bad("`n_runs` must be at least 1");
        }
        if self.lr.is_some_and(|v| !(v >= 0.0 && v.is_finite())) {
            return bad("`lr` must be a finite non-negative number");
        }
        if self.clip.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
            return bad("`clip` must be positive");
        }
        self.build_model()?;
        Ok(())
    }

    pub fn train_config(&self, model: &HybridModel) -> TrainConfig {
        let base = TrainConfig::for_model(model);
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch,
            lr: self.lr.unwrap_or(base.lr),
            clip: self.clip.unwrap_or(base.clip),
            seed: self.seed,
            sampling: self.sampling,
            ..base
        }
    }

    /// Row label in result tables, e.g. `Angle-Cascade` or `Model-1`.
    pub fn label(&self) -> String {
        fn title(s: &str) -> String {
            s.split('-')
                .map(|w| {
                    let mut c = w.chars();
                    c.next()
                        .map(|f| f.to_uppercase().chain(c).collect::<String>())
                        .unwrap_or_default()
                })
                .collect::<Vec<_>>()
                .join("-")
        }
        match self.model {
            ModelKind::Dv => format!("{}-{}", title(self.embedding.name()), title(self.topology.name())),
            ModelKind::Cv => format!(
                "CV-{}-{}-{}",
                title(self.cv.measurement.name()),
                title(self.cv.nonlinearity.name()),
                title(self.cv.parameterization.name())
            ),
            ModelKind::Classical1 => "Model-1".into(),
            ModelKind::Classical2 => "Model-2".into(),
        }
    }

    pub fn model_name(&self) -> &'static str {
        match self.model {
            ModelKind::Dv | ModelKind::Cv => "QCPINN",
            ModelKind::Classical1 | ModelKind::Classical2 => "PINN",
        }
    }
}

/// Combinations expanded as a cartesian product, outermost key first:
/// problem, model, embedding, topology.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matrix {
    pub problem: Option<Vec<ProblemKind>>,
    pub model: Option<Vec<ModelKind>>,
    pub embedding: Option<Vec<Embedding>>,
    pub topology: Option<Vec<TopologyKind>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(default)]
    pub base: ConfigFile,
    pub matrix: Option<Matrix>,
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// One partial config per combination, in table order.
    pub fn combinations(&self, overrides: &ConfigFile) -> Result<Vec<ConfigFile>, BenchError> {
        let m = self
            .matrix
            .as_ref()
            .ok_or_else(|| BenchError::Config("sweep has no [matrix]".into()))?;
        fn axis<T: Copy>(v: &Option<Vec<T>>) -> Vec<Option<T>> {
            match v {
                Some(v) => v.iter().map(|&x| Some(x)).collect(),
                None => vec![None],
            }
        }
        let given = [
            m.problem.as_ref().map(Vec::len),
            m.model.as_ref().map(Vec::len),
            m.embedding.as_ref().map(Vec::len),
            m.topology.as_ref().map(Vec::len),
        ];
        if given.iter().all(Option::is_none) || given.contains(&Some(0)) {
            return Err(BenchError::Config("sweep matrix is empty".into()));
        }
        let base = self.base.clone().apply_overrides(overrides);
        let mut out = Vec::new();
        for problem in axis(&m.problem) {
            for model in axis(&m.model) {
                for embedding in axis(&m.embedding) {
                    for topology in axis(&m.topology) {
                        let combo = ConfigFile {
                            problem,
                            model,
                            embedding,
                            topology,
                            ..ConfigFile::default()
                        };
                        out.push(base.clone().overlay(&combo));
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_resolves_with_desk_defaults() {
        let c = ConfigFile::parse("problem = \"helmholtz\"\nmodel = \"dv\"\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(c.epochs, 2000);
        assert_eq!(c.n_runs, 3);
        assert_eq!(c.build_model().unwrap().param_count(), 771);
        assert_eq!(c.label(), "Angle-Cascade");
        let paper = ConfigFile::parse("problem = \"cavity\"\nmodel = \"classical-1\"\npreset = \"paper\"\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!((paper.epochs, paper.n_runs), (20000, 10));
        assert_eq!(paper.build_model().unwrap().param_count(), 8003);
    }

    #[test]
    fn unknown_values_are_config_errors() {
        let e = ConfigFile::parse("problem = \"helmholtz\"\nmodel = \"dv\"\ntopology = \"star\"\n").unwrap_err();
        assert!(matches!(e, BenchError::Config(_)));
        assert!(ConfigFile::parse("problem = \"helmholtz\"\nmodle = \"dv\"\n").is_err());
        let e = ConfigFile::parse("problem = \"helmholtz\"\nmodel = \"dv\"\nqubits = 1\n")
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(matches!(e, BenchError::Config(_)));
        let e = ConfigFile::parse("problem = \"helmholtz\"\nmodel = \"cv\"\n[cv]\nmodes = 1\ncutoff = 20\nlayers = 1\nmeasurement = \"number\"\nnonlinearity = \"cross-kerr\"\nparameterization = \"full\"\n")
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(matches!(e, BenchError::Config(_)));
    }

    #[test]
    fn overlay_prefers_top() {
        let base = ConfigFile::parse("problem = \"wave\"\nmodel = \"dv\"\nepochs = 10\n").unwrap();
        let top = ConfigFile {
            epochs: Some(3),
            ..ConfigFile::default()
        };
        let c = base.overlay(&top).resolve().unwrap();
        assert_eq!(c.epochs, 3);
        assert_eq!(c.problem, ProblemKind::Wave);
    }

    #[test]
    fn sweep_expands_in_table_order() {
        let s = SweepFile::parse(
            "[base]\nproblem = \"helmholtz\"\nmodel = \"dv\"\n[matrix]\nembedding = [\"angle\", \"amplitude\"]\ntopology = [\"alternate\", \"cascade\", \"cross-mesh\", \"layered\"]\n",
        )
        .unwrap();
        let combos = s.combinations(&ConfigFile::default()).unwrap();
        let counts: Vec<usize> = combos
            .iter()
            .map(|c| c.resolve().unwrap().build_model().unwrap().param_count())
            .collect();
        assert_eq!(counts, vec![772, 771, 796, 776, 772, 771, 796, 776]);
        assert!(SweepFile::parse("[base]\nproblem = \"wave\"\n").unwrap().combinations(&ConfigFile::default()).is_err());
        assert!(SweepFile::parse("[matrix]\ntopology = []\n").unwrap().combinations(&ConfigFile::default()).is_err());
    }
}

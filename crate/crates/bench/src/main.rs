use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use qcpinn::dv::{Embedding, TopologyKind};
use qcpinn::pde::{PdeProblem, ProblemKind, SamplingStrategy};
use qcpinn::telemetry::CountingAlloc;
use qcpinn_bench::{
    experiment::load_reference, output_root, render_checkpoint, run_experiment, sweep, BenchError, ConfigFile,
    ModelKind, Preset, RenderOptions, SweepFile, EXIT_ABORTED,
};

#[global_allocator]
static ALLOC: CountingAlloc = CountingAlloc;

#[derive(Parser)]
#[command(name = "qcpinn", version, about = "Train and compare hybrid physics-informed networks")]
struct Cli {
    /// Directory relative output paths resolve against [env: QCPINN_OUTPUT_ROOT]
    #[arg(long, global = true)]
    output_root: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration over several seeds and write its report.
    Run {
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run every combination of a `[base]` + `[matrix]` file.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Render prediction, reference and error maps from a checkpoint.
    Render {
        /// Checkpoint path without extension.
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        problem: ProblemKind,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        /// Time slice for problems with two spatial axes.
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a run or sweep config and print the resolved settings.
    ValidateConfig {
        config: Option<PathBuf>,
        /// Treat the file as a sweep.
        #[arg(long)]
        sweep: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    problem: Option<ProblemKind>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long)]
    embedding: Option<Embedding>,
    #[arg(long)]
    topology: Option<TopologyKind>,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    clip: Option<f64>,
    #[arg(long)]
    sampling: Option<SamplingStrategy>,
    #[arg(long)]
    render_time: Option<f64>,
}

impl Overrides {
    fn into_file(self) -> ConfigFile {
        ConfigFile {
            problem: self.problem,
            model: self.model,
            embedding: self.embedding,
            topology: self.topology,
            qubits: self.qubits,
            layers: self.layers,
            cv: None,
            preset: self.preset,
            epochs: self.epochs,
            batch: self.batch,
            n_runs: self.runs,
            seed: self.seed,
            output: self.output,
            reference: self.reference,
            lr: self.lr,
            clip: self.clip,
            sampling: self.sampling,
            render_time: self.render_time,
        }
    }
}

fn load_config(path: Option<&Path>, overrides: Overrides) -> Result<ConfigFile, BenchError> {
    let file = match path {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    Ok(file.apply_overrides(&overrides.into_file()))
}

fn execute(cli: Cli) -> Result<i32, BenchError> {
    let root = output_root(cli.output_root.as_deref());
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = load_config(config.as_deref(), overrides)?.resolve()?;
            let bundle = run_experiment(&cfg, &root)?;
            print!("{}", qcpinn_bench::report::format_text(std::slice::from_ref(&bundle.row)));
            println!("wrote {} files to {}", bundle.files.len(), bundle.dir.display());
            Ok(if bundle.aborted() { EXIT_ABORTED } else { 0 })
        }
        Command::Sweep { config, overrides } => {
            let file = SweepFile::load(&config)?;
            let report = sweep(&file, &overrides.into_file(), &root)?;
            print!("{}", qcpinn_bench::report::format_text(&report.rows));
            println!("wrote {}", report.dir.display());
            Ok(match report.failures.first() {
                Some(&(_, code)) => code,
                None if report.aborted() => EXIT_ABORTED,
                None => 0,
            })
        }
        Command::Render {
            checkpoint,
            problem,
            grid,
            time,
            reference,
            out,
        } => {
            let reference = load_reference(reference.as_deref())?;
            let opts = RenderOptions { grid, time };
            let files = render_checkpoint(&checkpoint, &PdeProblem::new(problem), opts, reference.as_ref(), &root.join(out))?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(0)
        }
        Command::ValidateConfig {
            config,
            sweep,
            overrides,
        } => {
            let configs = if sweep {
                let path = config.ok_or_else(|| BenchError::Config("sweep validation needs a file".into()))?;
                let combos = SweepFile::load(&path)?.combinations(&overrides.into_file())?;
                combos.iter().map(ConfigFile::resolve).collect::<Result<Vec<_>, _>>()?
            } else {
                vec![load_config(config.as_deref(), overrides)?.resolve()?]
            };
            for cfg in &configs {
                let params = cfg.build_model()?.param_count();
                println!(
                    "{} {} {}: {params} parameters, {} epochs x {} runs",
                    cfg.problem,
                    cfg.model_name(),
                    cfg.label(),
                    cfg.epochs,
                    cfg.n_runs
                );
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli).context("qcpinn failed") {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            let code = e.downcast_ref::<BenchError>().map_or(1, BenchError::exit_code);
            eprintln!("error: {e:#}");
            ExitCode::from(code as u8)
        }
    }
}

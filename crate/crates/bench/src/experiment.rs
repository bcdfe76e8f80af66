//! Single experiments and sweeps, with every artifact written to disk.

use std::path::{Path, PathBuf};

use serde::Serialize;

use qcpinn::nn::save_checkpoint;
use qcpinn::pde::{predict, FieldError, ReferenceGrid, GRID};
use qcpinn::train::{multi_run, MultiRunSummary};

use crate::config::{ConfigFile, ExperimentConfig, SweepFile};
use crate::render::{render_fields, RenderOptions};
use crate::report::{self, ResultRow};
use crate::{create_dir, plot, BenchError};

/// Overrides the directory that relative `output` paths resolve against.
pub const OUTPUT_ROOT_ENV: &str = "QCPINN_OUTPUT_ROOT";

/// Explicit root, else the environment variable, else the working
/// directory.
pub fn output_root(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Debug)]
pub struct ReportBundle {
    pub dir: PathBuf,
    pub row: ResultRow,
    pub summary: MultiRunSummary,
    pub files: Vec<PathBuf>,
}

impl ReportBundle {
    pub fn aborted(&self) -> bool {
        self.row.aborted > 0
    }
}

#[derive(Serialize)]
struct RunSummary<'a> {
    seed: u64,
    epochs_completed: usize,
    final_loss: Option<f64>,
    aborted: &'a Option<String>,
    l2: &'a [FieldError],
    time_per_iter: f64,
    peak_memory_bytes: Option<u64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    result: &'a ResultRow,
    runs: Vec<RunSummary<'a>>,
    best_run: Option<usize>,
}

pub fn load_reference(path: Option<&Path>) -> Result<Option<ReferenceGrid>, BenchError> {
    let Some(path) = path else { return Ok(None) };
    if !path.exists() {
        return Err(BenchError::MissingReference(path.display().to_string()));
    }
    ReferenceGrid::from_path(path)
        .map(Some)
        .map_err(|e| BenchError::Config(e.to_string()))
}

fn write_loss_csv(record: &qcpinn::train::RunRecord, path: &Path) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| BenchError::io(path, e))?;
    let mut header = vec!["epoch".to_string(), "total".to_string()];
    header.extend(record.term_names.iter().cloned());
    header.extend(["lr".to_string(), "grad_norm".to_string()]);
    w.write_record(&header).map_err(|e| BenchError::io(path, e))?;
    for e in &record.history {
        let mut rec = vec![e.epoch.to_string(), e.total.to_string()];
        rec.extend(e.terms.iter().map(f64::to_string));
        rec.extend([e.lr.to_string(), e.grad_norm.to_string()]);
        w.write_record(&rec).map_err(|e| BenchError::io(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

/// Train `cfg.n_runs` seeds and write, under `root/cfg.output`:
/// `loss_run{i}.csv`, `loss_curve.png`, `results.csv`, `results.txt`,
/// `summary.json`, the best run's `checkpoint.{json,bin}` and, when a
/// reference is available, field maps in `fields/`.
pub fn run_experiment(cfg: &ExperimentConfig, root: &Path) -> Result<ReportBundle, BenchError> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let problem = cfg.problem();
    let reference = load_reference(cfg.reference.as_deref())?;
    if reference.is_some() && problem.d_out != 3 {
        return Err(BenchError::Config(format!("{} does not take a reference grid", problem.kind)));
    }
    let train_cfg = cfg.train_config(&model);
    let summary = multi_run(&model, &problem, &train_cfg, cfg.n_runs, reference.as_ref())?;

    let dir = root.join(&cfg.output);
    create_dir(&dir)?;
    let mut files = Vec::new();
    for (i, run) in summary.runs.iter().enumerate() {
        let path = dir.join(format!("loss_run{i}.csv"));
        write_loss_csv(&run.record, &path)?;
        files.push(path);
    }
    let curves: Vec<Vec<f64>> = summary
        .runs
        .iter()
        .map(|r| r.record.history.iter().map(|e| e.total).collect())
        .collect();
    let path = dir.join("loss_curve.png");
    plot::loss_curves(&curves, &path)?;
    files.push(path);

    let best = summary
        .runs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.record.aborted.is_none())
        .filter_map(|(i, r)| r.record.final_loss().map(|l| (i, l)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i);
    if let Some(i) = best {
        let params = &summary.runs[i].record.final_params;
        let stem = dir.join("checkpoint");
        save_checkpoint(&stem, &model, params).map_err(|e| BenchError::io(&stem, e))?;
        files.push(stem.with_extension("json"));
        files.push(stem.with_extension("bin"));
        if problem.has_exact() || reference.is_some() {
            let opts = RenderOptions {
                grid: GRID,
                time: cfg.render_time,
            };
            let rendered = render_fields(
                |pts| predict(&model, params, pts).map_err(|e| BenchError::Io(e.to_string())),
                &problem,
                opts,
                reference.as_ref(),
                &dir.join("fields"),
            )?;
            files.extend(rendered);
        }
    }

    let row = ResultRow::from_summary(cfg, model.param_count(), &summary);
    let path = dir.join("results.csv");
    report::write_csv(std::slice::from_ref(&row), &path)?;
    files.push(path);
    let path = dir.join("results.txt");
    report::write_text(std::slice::from_ref(&row), &path)?;
    files.push(path);

    let doc = Summary {
        config: cfg,
        result: &row,
        runs: summary
            .runs
            .iter()
            .map(|r| RunSummary {
                seed: r.record.seed,
                epochs_completed: r.record.history.len(),
                final_loss: r.record.final_loss(),
                aborted: &r.record.aborted,
                l2: &r.errors,
                time_per_iter: r.record.time_per_iter,
                peak_memory_bytes: r.record.peak_memory_bytes,
            })
            .collect(),
        best_run: best,
    };
    let path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&doc).map_err(|e| BenchError::io(&path, e))?;
    std::fs::write(&path, json).map_err(|e| BenchError::io(&path, e))?;
    files.push(path);

    Ok(ReportBundle {
        dir,
        row,
        summary,
        files,
    })
}

#[derive(Debug)]
pub struct SweepReport {
    pub dir: PathBuf,
    pub rows: Vec<ResultRow>,
    /// Exit status of each row that failed to run.
    pub failures: Vec<(usize, i32)>,
}

impl SweepReport {
    pub fn aborted(&self) -> bool {
        self.rows.iter().any(|r| r.aborted > 0)
    }
}

fn slug(s: &str) -> String {
    s.to_lowercase()
}

/// Run every combination in table order. All combinations are validated
/// before training starts; failures during a row are recorded in that row
/// and the sweep continues.
pub fn sweep(file: &SweepFile, overrides: &ConfigFile, root: &Path) -> Result<SweepReport, BenchError> {
    let combos = file.combinations(overrides)?;
    let configs: Vec<ExperimentConfig> = combos
        .iter()
        .enumerate()
        .map(|(i, c)| c.resolve().map_err(|e| BenchError::Config(format!("combination {i}: {e}"))))
        .collect::<Result<_, _>>()?;
    let base = file
        .base
        .clone()
        .apply_overrides(overrides)
        .output
        .unwrap_or_else(|| PathBuf::from("sweep"));
    let dir = root.join(&base);
    let mut rows = Vec::with_capacity(configs.len());
    let mut failures = Vec::new();
    for (i, cfg) in configs.into_iter().enumerate() {
        let cfg = ExperimentConfig {
            output: base.join(format!("{i:02}-{}-{}", cfg.problem.name(), slug(&cfg.label()))),
            ..cfg
        };
        match run_experiment(&cfg, root) {
            Ok(bundle) => rows.push(bundle.row),
            Err(e) => {
                let params = cfg.build_model().map(|m| m.param_count()).unwrap_or(0);
                failures.push((i, e.exit_code()));
                rows.push(ResultRow::failed(&cfg, params, e.to_string()));
            }
        }
    }
    create_dir(&dir)?;
    report::write_csv(&rows, &dir.join("results.csv"))?;
    report::write_text(&rows, &dir.join("results.txt"))?;
    Ok(SweepReport { dir, rows, failures })
}

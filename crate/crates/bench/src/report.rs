//! Result tables: CSV without timing columns, aligned text with them.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qcpinn::train::{MultiRunSummary, Stats};

use crate::{BenchError, ExperimentConfig};

/// One table row per configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub problem: String,
    pub model: String,
    pub label: String,
    /// Counted from the live model.
    pub params: usize,
    pub runs: usize,
    pub aborted: usize,
    /// Relative L2 in percent per field, over runs that finished.
    pub l2: Vec<(String, Stats)>,
    pub final_loss: Option<Stats>,
    /// Seconds per epoch.
    pub time_per_iter: Option<Stats>,
    pub peak_memory_bytes: Option<u64>,
    /// Set when the configuration could not be run at all.
    pub error: Option<String>,
}

impl ResultRow {
    pub fn from_summary(cfg: &ExperimentConfig, params: usize, s: &MultiRunSummary) -> Self {
        Self {
            problem: cfg.problem.name().into(),
            model: cfg.model_name().into(),
            label: cfg.label(),
            params,
            runs: s.runs.len(),
            aborted: s.runs.iter().filter(|r| r.record.aborted.is_some()).count(),
            l2: s.l2.clone(),
            final_loss: s.final_loss,
            time_per_iter: Some(s.time_per_iter),
            peak_memory_bytes: s.runs.iter().filter_map(|r| r.record.peak_memory_bytes).max(),
            error: None,
        }
    }

    pub fn failed(cfg: &ExperimentConfig, params: usize, error: String) -> Self {
        Self {
            problem: cfg.problem.name().into(),
            model: cfg.model_name().into(),
            label: cfg.label(),
            params,
            runs: 0,
            aborted: 0,
            l2: Vec::new(),
            final_loss: None,
            time_per_iter: None,
            peak_memory_bytes: None,
            error: Some(error),
        }
    }

    pub fn status(&self) -> String {
        match &self.error {
            Some(e) => format!("error: {e}"),
            None if self.aborted > 0 => format!("aborted {}/{}", self.aborted, self.runs),
            None => "ok".into(),
        }
    }
}

fn field_names(rows: &[ResultRow]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for r in rows {
        for (f, _) in &r.l2 {
            if !names.contains(f) {
                names.push(f.clone());
            }
        }
    }
    names
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Machine-readable table. Timing and memory are left out so repeated runs
/// with the same seed give identical bytes.
pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<(), BenchError> {
    let fields = field_names(rows);
    let mut w = csv::Writer::from_path(path).map_err(|e| BenchError::io(path, e))?;
    let mut header: Vec<String> = ["problem", "model", "label", "params", "runs", "aborted"]
        .map(String::from)
        .to_vec();
    for f in &fields {
        header.push(format!("l2_{f}_mean"));
        header.push(format!("l2_{f}_std"));
    }
    header.extend(["final_loss_mean", "final_loss_std", "status"].map(String::from));
    w.write_record(&header).map_err(|e| BenchError::io(path, e))?;
    for r in rows {
        let mut rec = vec![
            r.problem.clone(),
            r.model.clone(),
            r.label.clone(),
            r.params.to_string(),
            r.runs.to_string(),
            r.aborted.to_string(),
        ];
        for f in &fields {
            let s = r.l2.iter().find(|(n, _)| n == f).map(|(_, s)| *s);
            rec.push(opt(s.map(|s| s.mean)));
            rec.push(opt(s.map(|s| s.std)));
        }
        rec.push(opt(r.final_loss.map(|s| s.mean)));
        rec.push(opt(r.final_loss.map(|s| s.std)));
        rec.push(r.status());
        w.write_record(&rec).map_err(|e| BenchError::io(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

/// Human-readable table including time per epoch and peak memory.
pub fn format_text(rows: &[ResultRow]) -> String {
    let fields = field_names(rows);
    let mut header: Vec<String> = vec!["Problem".into(), "Model".into(), "Config".into(), "Np".into()];
    header.extend(fields.iter().map(|f| format!("L2 {f} (%)")));
    header.extend(["Final loss".into(), "ms/iter".into(), "Peak MB".into(), "Status".into()]);
    let mut table = vec![header];
    for r in rows {
        let mut row = vec![r.problem.clone(), r.model.clone(), r.label.clone(), r.params.to_string()];
        for f in &fields {
            row.push(match r.l2.iter().find(|(n, _)| n == f) {
                Some((_, s)) => format!("{:.2} ± {:.2}", s.mean, s.std),
                None => "-".into(),
            });
        }
        row.push(match r.final_loss {
            Some(s) => format!("{:.3e} ± {:.1e}", s.mean, s.std),
            None => "-".into(),
        });
        row.push(match r.time_per_iter {
            Some(s) => format!("{:.2}", s.mean * 1e3),
            None => "-".into(),
        });
        row.push(match r.peak_memory_bytes {
            Some(b) => format!("{:.1}", b as f64 / (1024.0 * 1024.0)),
            None => "-".into(),
        });
        row.push(r.status());
        table.push(row);
    }
    let widths: Vec<usize> = (0..table[0].len())
        .map(|c| table.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in table.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        if i == 0 {
            let _ = writeln!(out, "{}", widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "));
        }
    }
    out
}

pub fn write_text(rows: &[ResultRow], path: &Path) -> Result<(), BenchError> {
    std::fs::write(path, format_text(rows)).map_err(|e| BenchError::io(path, e))
}

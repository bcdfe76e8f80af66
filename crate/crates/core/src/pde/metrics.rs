//! Relative L2 error, evaluation grids and reference data.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PdeError, PdeProblem, ProblemKind};
use crate::nn::HybridModel;

/// Points per axis of evaluation grids.
pub const GRID: usize = 100;
/// Time slices used for the time-dependent 3D problem.
pub const TIME_SLICES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// `100 * |pred - reference| / |reference|`.
pub fn relative_l2(pred: &[f64], reference: &[f64]) -> Result<f64, PdeError> {
    if pred.len() != reference.len() {
        return Err(PdeError::LengthMismatch {
            pred: pred.len(),
            reference: reference.len(),
        });
    }
    let den: f64 = reference.iter().map(|r| r * r).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(PdeError::ZeroReference);
    }
    let num: f64 = pred
        .iter()
        .zip(reference)
        .map(|(p, r)| (p - r).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(100.0 * num / den)
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Uniform 100 x 100 grid over the two non-time axes (or both axes for 2D
/// problems). The 3D problem repeats it at each of [`TIME_SLICES`]. Cavity
/// has no built-in grid.
pub fn evaluation_grid(problem: &PdeProblem) -> Option<Vec<Vec<f64>>> {
    let (lo, hi) = (&problem.lo, &problem.hi);
    match problem.kind {
        ProblemKind::Cavity => None,
        ProblemKind::ConvectionDiffusion => {
            let mut out = Vec::with_capacity(TIME_SLICES.len() * GRID * GRID);
            for t in TIME_SLICES {
                for x in linspace(lo[1], hi[1], GRID) {
                    for y in linspace(lo[2], hi[2], GRID) {
                        out.push(vec![t, x, y]);
                    }
                }
            }
            Some(out)
        }
        _ => {
            let mut out = Vec::with_capacity(GRID * GRID);
            for a in linspace(lo[0], hi[0], GRID) {
                for b in linspace(lo[1], hi[1], GRID) {
                    out.push(vec![a, b]);
                }
            }
            Some(out)
        }
    }
}

/// Field values on a regular `(t, x, y)` grid, read from CSV with columns
/// `t,x,y,u,v,p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceGrid {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct Row {
    t: f64,
    x: f64,
    y: f64,
    u: f64,
    v: f64,
    p: f64,
}

impl ReferenceGrid {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, PdeError> {
        let mut points = Vec::new();
        let mut values = Vec::new();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        for row in rdr.deserialize::<Row>() {
            let r = row.map_err(|e| PdeError::Reference(e.to_string()))?;
            points.push(vec![r.t, r.x, r.y]);
            values.push(vec![r.u, r.v, r.p]);
        }
        let grid = Self { points, values };
        grid.validate()?;
        Ok(grid)
    }

    pub fn from_path(path: &Path) -> Result<Self, PdeError> {
        let f = std::fs::File::open(path)
            .map_err(|e| PdeError::Reference(format!("{}: {e}", path.display())))?;
        Self::from_reader(f)
    }

    fn validate(&self) -> Result<(), PdeError> {
        if self.points.is_empty() {
            return Err(PdeError::Reference("no rows".into()));
        }
        if self.points.iter().chain(&self.values).flatten().any(|v| !v.is_finite()) {
            return Err(PdeError::Reference("non-finite entry".into()));
        }
        let mut cells = 1;
        for axis in 0..3 {
            let distinct: HashSet<u64> = self.points.iter().map(|p| p[axis].to_bits()).collect();
            cells *= distinct.len();
        }
        let unique: HashSet<Vec<u64>> = self
            .points
            .iter()
            .map(|p| p.iter().map(|v| v.to_bits()).collect())
            .collect();
        if unique.len() != self.points.len() || cells != self.points.len() {
            return Err(PdeError::Reference(format!(
                "{} rows do not form a regular grid with unique points",
                self.points.len()
            )));
        }
        Ok(())
    }

    pub fn field(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[k]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub l2: f64,
}

/// Model predictions at `points`, one row per point.
pub fn predict(model: &HybridModel, params: &[f64], points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, PdeError> {
    let prepared = model.prepare(params)?;
    points
        .par_iter()
        .map(|x| model.eval(&prepared, params, x).map_err(PdeError::from))
        .collect()
}

type Points = Vec<Vec<f64>>;

/// Evaluation points with reference values: the exact solution on the
/// built-in grid, or the supplied reference grid.
pub fn reference_values(
    problem: &PdeProblem,
    reference: Option<&ReferenceGrid>,
) -> Result<(Points, Points), PdeError> {
    if let Some(r) = reference {
        if problem.d_in != 3 || problem.d_out != 3 {
            return Err(PdeError::Reference(format!("{} does not take a (t,x,y,u,v,p) grid", problem.kind)));
        }
        return Ok((r.points.clone(), r.values.clone()));
    }
    match evaluation_grid(problem) {
        Some(points) => {
            let values = points
                .iter()
                .map(|x| problem.exact_f64(x).expect("grid problems have closed forms"))
                .collect();
            Ok((points, values))
        }
        None => Err(PdeError::MissingReference(problem.kind)),
    }
}

/// Relative L2 error per output field.
pub fn field_errors(
    problem: &PdeProblem,
    model: &HybridModel,
    params: &[f64],
    reference: Option<&ReferenceGrid>,
) -> Result<Vec<FieldError>, PdeError> {
    let (points, truth) = reference_values(problem, reference)?;
    let pred = predict(model, params, &points)?;
    problem
        .fields
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let p: Vec<f64> = pred.iter().map(|r| r[k]).collect();
            let t: Vec<f64> = truth.iter().map(|r| r[k]).collect();
            Ok(FieldError {
                field: name.to_string(),
                l2: relative_l2(&p, &t)?,
            })
        })
        .collect()
}

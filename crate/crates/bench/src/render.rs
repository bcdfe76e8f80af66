//! Prediction, reference and absolute-error maps on a uniform grid.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use qcpinn::nn::load_checkpoint;
use qcpinn::pde::{predict, PdeProblem, ReferenceGrid};

use crate::{create_dir, plot, BenchError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    /// Points per axis.
    pub grid: usize,
    /// Time slice for problems with two spatial axes; defaults to the end of
    /// the time interval.
    pub time: Option<f64>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { grid: 100, time: None }
    }
}

/// A 2D slice: points are ordered with `b` varying fastest.
struct Plane {
    axes: [&'static str; 2],
    a: Vec<f64>,
    b: Vec<f64>,
    points: Vec<Vec<f64>>,
    truth: Vec<Vec<f64>>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn axis_names(problem: &PdeProblem) -> [&'static str; 2] {
    match problem.d_in {
        3 => ["x", "y"],
        _ if problem.kind == qcpinn::pde::ProblemKind::Helmholtz => ["x", "y"],
        _ => ["t", "x"],
    }
}

fn plane(problem: &PdeProblem, opts: RenderOptions, reference: Option<&ReferenceGrid>) -> Result<Plane, BenchError> {
    let axes = axis_names(problem);
    if let Some(r) = reference {
        if problem.d_in != 3 || problem.d_out != 3 {
            return Err(BenchError::Config(format!("{} does not take a reference grid", problem.kind)));
        }
        let want = opts.time.unwrap_or(problem.hi[0]);
        let t = r
            .points
            .iter()
            .map(|p| p[0])
            .min_by(|x, y| (x - want).abs().total_cmp(&(y - want).abs()))
            .expect("reference grids are non-empty");
        let mut rows: Vec<(f64, f64, Vec<f64>)> = r
            .points
            .iter()
            .zip(&r.values)
            .filter(|(p, _)| p[0] == t)
            .map(|(p, v)| (p[1], p[2], v.clone()))
            .collect();
        rows.sort_by(|l, r| l.0.total_cmp(&r.0).then(l.1.total_cmp(&r.1)));
        let uniq = |k: usize| -> Vec<f64> {
            let s: BTreeSet<u64> = rows.iter().map(|r| if k == 0 { r.0 } else { r.1 }.to_bits()).collect();
            let mut v: Vec<f64> = s.into_iter().map(f64::from_bits).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let (a, b) = (uniq(0), uniq(1));
        let points = rows.iter().map(|r| vec![t, r.0, r.1]).collect();
        let truth = rows.into_iter().map(|r| r.2).collect();
        return Ok(Plane { axes, a, b, points, truth });
    }
    if opts.grid < 2 {
        return Err(BenchError::Config("render grid needs at least 2 points per axis".into()));
    }
    if !problem.has_exact() {
        return Err(BenchError::MissingReference(format!(
            "{} has no closed form; pass a reference grid",
            problem.kind
        )));
    }
    let off = problem.d_in - 2;
    let a = linspace(problem.lo[off], problem.hi[off], opts.grid);
    let b = linspace(problem.lo[off + 1], problem.hi[off + 1], opts.grid);
    let t = opts.time.unwrap_or(problem.hi[0]);
    let mut points = Vec::with_capacity(a.len() * b.len());
    for &x in &a {
        for &y in &b {
            points.push(if off == 1 { vec![t, x, y] } else { vec![x, y] });
        }
    }
    let truth = points
        .iter()
        .map(|p| problem.exact_f64(p).expect("checked above"))
        .collect();
    Ok(Plane { axes, a, b, points, truth })
}

/// Write `<field>_pred.png`, `<field>_ref.png`, `<field>_abs_err.png` and
/// `<field>.csv` for every output field of `problem`. `predict` maps grid
/// points to model outputs.
pub fn render_fields<F>(
    predict: F,
    problem: &PdeProblem,
    opts: RenderOptions,
    reference: Option<&ReferenceGrid>,
    dir: &Path,
) -> Result<Vec<PathBuf>, BenchError>
where
    F: Fn(&[Vec<f64>]) -> Result<Vec<Vec<f64>>, BenchError>,
{
    let plane = plane(problem, opts, reference)?;
    let pred = predict(&plane.points)?;
    if pred.len() != plane.points.len() || pred.iter().any(|p| p.len() != problem.d_out) {
        return Err(BenchError::Config("predictor output does not match the problem".into()));
    }
    create_dir(&dir.to_path_buf())?;
    let (n_a, n_b) = (plane.a.len(), plane.b.len());
    let mut files = Vec::new();
    for (k, field) in problem.fields.iter().enumerate() {
        let p: Vec<f64> = pred.iter().map(|r| r[k]).collect();
        let t: Vec<f64> = plane.truth.iter().map(|r| r[k]).collect();
        let e: Vec<f64> = p.iter().zip(&t).map(|(p, t)| (p - t).abs()).collect();
        for (tag, v) in [("pred", &p), ("ref", &t), ("abs_err", &e)] {
            let path = dir.join(format!("{field}_{tag}.png"));
            plot::heatmap(v, n_a, n_b, &path)?;
            files.push(path);
        }
        let path = dir.join(format!("{field}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| BenchError::io(&path, e))?;
        let header = [plane.axes[0], plane.axes[1], "pred", "ref", "abs_err"];
        w.write_record(header).map_err(|e| BenchError::io(&path, e))?;
        for (i, pt) in plane.points.iter().enumerate() {
            let (x, y) = (pt[pt.len() - 2], pt[pt.len() - 1]);
            w.serialize((x, y, p[i], t[i], e[i])).map_err(|e| BenchError::io(&path, e))?;
        }
        w.flush().map_err(|e| BenchError::io(&path, e))?;
        files.push(path);
    }
    Ok(files)
}

/// Render a saved checkpoint (`<stem>.json` + `<stem>.bin`).
pub fn render_checkpoint(
    stem: &Path,
    problem: &PdeProblem,
    opts: RenderOptions,
    reference: Option<&ReferenceGrid>,
    dir: &Path,
) -> Result<Vec<PathBuf>, BenchError> {
    let (model, params) = load_checkpoint(stem).map_err(|e| BenchError::io(stem, e))?;
    if model.spec.n_in != problem.d_in || model.spec.n_out != problem.d_out {
        return Err(BenchError::Config(format!(
            "dimension mismatch: checkpoint maps {} -> {}, {} needs {} -> {}",
            model.spec.n_in, model.spec.n_out, problem.kind, problem.d_in, problem.d_out
        )));
    }
    render_fields(
        |pts| predict(&model, &params, pts).map_err(|e| BenchError::Io(e.to_string())),
        problem,
        opts,
        reference,
        dir,
    )
}

//! PNG emission: viridis heatmaps and log-scale loss curves.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::BenchError;

/// Row-major `values[i * n_b + j]` over axes `a` (horizontal) and `b`
/// (vertical, increasing upward), scaled linearly between its own min and
/// max. A constant field renders as the low end of the map.
pub fn heatmap(values: &[f64], n_a: usize, n_b: usize, path: &Path) -> Result<(), BenchError> {
    assert_eq!(values.len(), n_a * n_b, "heatmap size");
    let scale = (400 / n_a.max(n_b)).max(1) as u32;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let span = hi - lo;
    let mut img = RgbImage::new(n_a as u32 * scale, n_b as u32 * scale);
    for i in 0..n_a {
        for j in 0..n_b {
            let t = if span > 0.0 { (values[i * n_b + j] - lo) / span } else { 0.0 };
            let c = colorous::VIRIDIS.eval_continuous(t.clamp(0.0, 1.0));
            let px = Rgb([c.r, c.g, c.b]);
            let row = (n_b - 1 - j) as u32 * scale;
            for dx in 0..scale {
                for dy in 0..scale {
                    img.put_pixel(i as u32 * scale + dx, row + dy, px);
                }
            }
        }
    }
    img.save(path).map_err(|e| BenchError::io(path, e))
}

const W: u32 = 640;
const H: u32 = 400;
const MARGIN: u32 = 40;

fn line(img: &mut RgbImage, (x0, y0): (f64, f64), (x1, y1): (f64, f64), c: Rgb<u8>) {
    let steps = ((x1 - x0).abs().max((y1 - y0).abs()).ceil() as usize).max(1);
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let x = (x0 + t * (x1 - x0)).round();
        let y = (y0 + t * (y1 - y0)).round();
        if x >= 0.0 && y >= 0.0 && (x as u32) < W && (y as u32) < H {
            img.put_pixel(x as u32, y as u32, c);
        }
    }
}

/// Total loss per epoch on a log10 axis, one viridis-coloured line per run.
/// Non-positive or non-finite entries are skipped.
pub fn loss_curves(curves: &[Vec<f64>], path: &Path) -> Result<(), BenchError> {
    let mut img = RgbImage::from_pixel(W, H, Rgb([255, 255, 255]));
    let black = Rgb([0, 0, 0]);
    let (x_lo, x_hi) = (MARGIN as f64, (W - MARGIN / 2) as f64);
    let (y_top, y_bot) = ((MARGIN / 2) as f64, (H - MARGIN) as f64);
    line(&mut img, (x_lo, y_bot), (x_hi, y_bot), black);
    line(&mut img, (x_lo, y_top), (x_lo, y_bot), black);

    let logs: Vec<Vec<Option<f64>>> = curves
        .iter()
        .map(|c| c.iter().map(|&v| (v > 0.0 && v.is_finite()).then(|| v.log10())).collect())
        .collect();
    let (lo, hi) = logs
        .iter()
        .flatten()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let n = curves.iter().map(Vec::len).max().unwrap_or(0);
    if n > 0 && lo.is_finite() {
        let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));
        // one tick per decade
        let mut d = lo;
        while d <= hi {
            let y = y_bot - (d - lo) / (hi - lo) * (y_bot - y_top);
            line(&mut img, (x_lo - 5.0, y), (x_lo, y), black);
            d += 1.0;
        }
        let px = |i: usize, v: f64| {
            let x = x_lo + i as f64 / (n.max(2) - 1) as f64 * (x_hi - x_lo);
            (x, y_bot - (v - lo) / (hi - lo) * (y_bot - y_top))
        };
        for (r, curve) in logs.iter().enumerate() {
            let c = colorous::VIRIDIS.eval_rational(r, logs.len().max(2) + 1);
            let colour = Rgb([c.r, c.g, c.b]);
            let mut prev = None;
            for (i, v) in curve.iter().enumerate() {
                match v {
                    Some(v) => {
                        let p = px(i, *v);
                        if let Some(q) = prev {
                            line(&mut img, q, p, colour);
                        }
                        prev = Some(p);
                    }
                    None => prev = None,
                }
            }
        }
    }
    img.save(path).map_err(|e| BenchError::io(path, e))
}

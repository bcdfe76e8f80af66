//! Acceptance criteria C1-C9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Paper-scale variants are skipped unless
//! `--include-ignored` (or `--ignored`) is passed.

use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcpinn::autodiff::{seed_inputs, ElementaryOp, FieldDerivs, Jet, ParamTape, Value};
use qcpinn::cv::{CvConfig, Measurement, Nonlinearity, Parameterization, QuantumStateCv};
use qcpinn::dv::{DvCircuit, DvTopology, Embedding, GateKind, TopologyKind};
use qcpinn::nn::{Architecture, Baseline, HybridModel, ModelSpec};
use qcpinn::pde::{evaluate_loss, sample_batch, PdeProblem, ProblemKind, Region, SamplingStrategy};
use qcpinn::train::{multi_run, train, MultiRunSummary, RunRecord, TrainConfig};

// Pinned tolerances.
const C3_JET_REL: f64 = 1e-5;
const C3_MODEL_REL: f64 = 1e-4;
const C3_SHIFT_ABS: f64 = 1e-9;
const C4_MSE: f64 = 1e-10;
const C5_PHOTON: f64 = 1e-6;
const C5_BS: f64 = 1e-10;
const C6_LOSS_RATIO: f64 = 0.10;
const C6_L2: f64 = 50.0;
const C6_PAPER_L2: f64 = 15.0;
const C7_L2: f64 = 25.0;
const C7_PAPER_L2: f64 = 10.0;
const C8_RATIO: f64 = 5.0;

const DESK_EPOCHS: usize = 2000;
const DESK_SEEDS: usize = 3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn dv_model(kind: TopologyKind, embedding: Embedding, n_in: usize, n_out: usize) -> HybridModel {
    HybridModel::new(ModelSpec {
        n_in,
        n_out,
        architecture: Architecture::Dv {
            topology: kind,
            embedding,
            qubits: 5,
            layers: 1,
        },
    })
    .unwrap()
}

fn cv_model(n_in: usize, n_out: usize, config: CvConfig) -> HybridModel {
    HybridModel::new(ModelSpec {
        n_in,
        n_out,
        architecture: Architecture::Cv { config },
    })
    .unwrap()
}

fn c1_parameter_counts() -> Outcome {
    use Embedding::{Amplitude, Angle};
    use TopologyKind::*;
    let mut cases: Vec<(String, HybridModel, usize)> = Vec::new();
    for e in [Angle, Amplitude] {
        for (k, n) in [(Alternate, 772), (Cascade, 771), (CrossMesh, 796), (Layered, 776)] {
            cases.push((format!("helmholtz {e}-{k}"), dv_model(k, e, 2, 1), n));
        }
    }
    for (k, n) in [(Cascade, 923), (Alternate, 924), (Layered, 928), (CrossMesh, 948)] {
        cases.push((format!("cavity angle-{k}"), dv_model(k, Angle, 3, 3), n));
    }
    for (k, n) in [(Cascade, 821), (CrossMesh, 846)] {
        cases.push((format!("3->1 angle-{k}"), dv_model(k, Angle, 3, 1), n));
    }
    for (b, n_in, n_out, n) in [
        (Baseline::Model2, 2, 1, 2751),
        (Baseline::Model2, 3, 1, 2801),
        (Baseline::Model2, 3, 3, 2903),
        (Baseline::Model1, 2, 1, 7851),
        (Baseline::Model1, 3, 1, 7901),
        (Baseline::Model1, 3, 3, 8003),
    ] {
        cases.push((format!("{b:?} {n_in}->{n_out}"), HybridModel::baseline(b, n_in, n_out), n));
    }
    let full = CvConfig {
        parameterization: Parameterization::Full,
        ..CvConfig::default()
    };
    cases.push(("cv helmholtz".into(), cv_model(2, 1, full), 469));
    cases.push(("cv cavity".into(), cv_model(3, 3, full), 621));
    let wrong: Vec<String> = cases
        .iter()
        .filter(|(_, m, n)| m.param_count() != *n)
        .map(|(name, m, n)| format!("{name}: {} != {n}", m.param_count()))
        .collect();
    outcome(
        wrong.is_empty(),
        if wrong.is_empty() {
            format!("{} published totals reproduced", cases.len())
        } else {
            wrong.join("; ")
        },
    )
}

fn c2_structural_formulas() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for kind in TopologyKind::ALL {
        for n in 2..=8 {
            for l in 1..=3 {
                let t = DvTopology::new(kind, n, l).unwrap();
                let moments = t.moments();
                let depth = moments.len();
                let two_q = moments.iter().flatten().filter(|g| g.kind.is_two_qubit()).count();
                let params = moments.iter().flatten().filter(|g| g.param.is_some()).count();
                let (want_depth, want_two_q) = match kind {
                    TopologyKind::Alternate | TopologyKind::Layered => (6 * l, (n - 1) * l),
                    TopologyKind::Cascade => ((n + 2) * l, n * l),
                    TopologyKind::CrossMesh => ((n * n - n + 4) * l, (n * n - n) * l),
                };
                let want_params = match kind {
                    TopologyKind::CrossMesh => Some((n * n + 3 * n) * l),
                    _ => None,
                };
                checked += 1;
                if depth != want_depth || two_q != want_two_q || want_params.is_some_and(|p| p != params) {
                    bad.push(format!("{kind} n={n} L={l}: depth {depth}, 2q {two_q}, params {params}"));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{checked} (topology, n, L) circuits match depth, entangler and cross-mesh n^2+3n formulas")
        } else {
            bad.join("; ")
        },
    )
}

/// `|a - b| / max(|b|, 1)`.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn c3a_jets() -> Outcome {
    const OPS: [ElementaryOp; 14] = [
        ElementaryOp::Add,
        ElementaryOp::Sub,
        ElementaryOp::Mul,
        ElementaryOp::Div,
        ElementaryOp::Neg,
        ElementaryOp::Sin,
        ElementaryOp::Cos,
        ElementaryOp::Exp,
        ElementaryOp::Tanh,
        ElementaryOp::Powi(2),
        ElementaryOp::Powi(3),
        ElementaryOp::Powi(-1),
        ElementaryOp::Powi(-2),
        ElementaryOp::Powi(5),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let op = OPS[rng.random_range(0..OPS.len())];
        // each argument is a bilinear function of (x, y), offset away from 0
        let coef: Vec<[f64; 4]> = (0..op.arity())
            .map(|_| {
                let c0 = 0.8 + rng.random_range(0.0..0.7);
                [c0, rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.3..0.3)]
            })
            .collect();
        let x = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let f = |x0: f64, x1: f64| {
            let args: Vec<f64> = coef.iter().map(|c| c[0] + c[1] * x0 + c[2] * x1 + c[3] * x0 * x1).collect();
            op.apply_f64(&args)
        };
        let s = seed_inputs::<2>(&x).unwrap();
        let args: Vec<Jet<2>> = coef
            .iter()
            .map(|c| (s[0] * c[1] + s[1] * c[2] + s[0] * s[1] * c[3]) + c[0])
            .collect();
        let j = op.apply(&args).unwrap();
        let h = 1e-4;
        let g = [
            (f(x[0] + h, x[1]) - f(x[0] - h, x[1])) / (2.0 * h),
            (f(x[0], x[1] + h) - f(x[0], x[1] - h)) / (2.0 * h),
        ];
        let f0 = f(x[0], x[1]);
        let hxx = (f(x[0] + h, x[1]) - 2.0 * f0 + f(x[0] - h, x[1])) / (h * h);
        let hyy = (f(x[0], x[1] + h) - 2.0 * f0 + f(x[0], x[1] - h)) / (h * h);
        let hxy = (f(x[0] + h, x[1] + h) - f(x[0] + h, x[1] - h) - f(x[0] - h, x[1] + h) + f(x[0] - h, x[1] - h))
            / (4.0 * h * h);
        for (a, b) in [
            (j.v, f0),
            (j.g[0], g[0]),
            (j.g[1], g[1]),
            (j.h[0][0], hxx),
            (j.h[1][1], hyy),
            (j.h[0][1], hxy),
            (j.h[1][0], hxy),
        ] {
            worst = worst.max(rel(a, b));
        }
    }
    outcome(
        worst < C3_JET_REL,
        format!("1000 random op cases, worst value/grad/hessian rel err {worst:.2e} (limit {C3_JET_REL:.0e})"),
    )
}

fn c3b_model_gradient() -> Outcome {
    let p = PdeProblem::new(ProblemKind::Helmholtz);
    let m = dv_model(TopologyKind::Cascade, Embedding::Angle, 2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let params = m.init_params(&mut rng);
    let batch = sample_batch(&p, SamplingStrategy::Uniform, 5, 16).unwrap();
    let grad = evaluate_loss(&p, &m, &params, &batch, true).unwrap().grad.unwrap();
    let loss = |q: &[f64]| evaluate_loss(&p, &m, q, &batch, false).unwrap().total;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let i = rng.random_range(0..params.len());
        let h = 1e-5 * params[i].abs().max(1.0);
        let mut a = params.clone();
        a[i] += h;
        let mut b = params.clone();
        b[i] -= h;
        let fd = (loss(&a) - loss(&b)) / (2.0 * h);
        worst = worst.max(rel(grad[i], fd));
    }
    outcome(
        worst < C3_MODEL_REL,
        format!("20 random parameters of 771, worst rel err {worst:.2e} (limit {C3_MODEL_REL:.0e})"),
    )
}

fn c3c_parameter_shift() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0f64;
    let mut count = 0;
    for kind in TopologyKind::ALL {
        let c = DvCircuit::new(DvTopology::new(kind, 4, 2).unwrap(), Embedding::Angle);
        let params = c.init_params(&mut rng);
        let features: Vec<f64> = (0..4).map(|_| rng.random_range(-1.5..1.5)).collect();
        let expect = |p: &[f64]| -> Vec<f64> {
            let f = features.iter().map(|&x| Jet::<0>::constant(x)).collect();
            c.forward(&c.prepare(p, 0), f, None).unwrap().iter().map(|j| j.v).collect()
        };
        let rotations: Vec<usize> = c
            .topology
            .gates()
            .into_iter()
            .filter(|g| matches!(g.kind, GateKind::RX | GateKind::RY | GateKind::RZ))
            .filter_map(|g| g.param)
            .collect();
        let prepared = c.prepare(&params, 0);
        for q in 0..4 {
            let mut tape = ParamTape::<0>::new();
            let f = features.iter().map(|&x| Jet::constant(x)).collect();
            c.forward(&prepared, f, Some(&mut tape)).unwrap();
            let mut adj = vec![Jet::zero(); 4];
            adj[q] = Jet::constant(1.0);
            let mut grad = vec![0.0; params.len()];
            tape.backward(&params, Value::Real(adj), &mut grad);
            for &p in &rotations {
                let mut plus = params.clone();
                plus[p] += FRAC_PI_2;
                let mut minus = params.clone();
                minus[p] -= FRAC_PI_2;
                let shift = (expect(&plus)[q] - expect(&minus)[q]) / 2.0;
                worst = worst.max((grad[p] - shift).abs());
                count += 1;
            }
        }
    }
    outcome(
        worst < C3_SHIFT_ABS,
        format!("{count} rotation-gate derivatives, worst abs err {worst:.2e} (limit {C3_SHIFT_ABS:.0e})"),
    )
}

fn exact_residual_mse<const D: usize>(p: &PdeProblem, rng: &mut ChaCha8Rng) -> f64 {
    let interior: Vec<_> = p
        .terms
        .iter()
        .filter(|t| p.roles[t.role].region == Region::Interior)
        .collect();
    let mut sum = 0.0;
    let mut n = 0usize;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..D).map(|k| rng.random_range(p.lo[k]..p.hi[k])).collect();
        let out = p.exact(&seed_inputs::<D>(&x).unwrap()).unwrap();
        let f: Vec<FieldDerivs<f64>> = out.iter().map(FieldDerivs::from_jet).collect();
        for t in &interior {
            for r in p.residual(t, &x, &f) {
                sum += r * r;
                n += 1;
            }
        }
    }
    sum / n as f64
}

fn c4_exact_residuals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut parts = Vec::new();
    let mut pass = true;
    for kind in [
        ProblemKind::Helmholtz,
        ProblemKind::Wave,
        ProblemKind::KleinGordon,
        ProblemKind::ConvectionDiffusion,
    ] {
        let p = PdeProblem::new(kind);
        let mse = match p.d_in {
            2 => exact_residual_mse::<2>(&p, &mut rng),
            _ => exact_residual_mse::<3>(&p, &mut rng),
        };
        pass &= mse < C4_MSE;
        parts.push(format!("{kind} {mse:.1e}"));
    }
    outcome(pass, format!("residual MSE at 1000 points: {} (limit {C4_MSE:.0e})", parts.join(", ")))
}

fn c5_cv_physics() -> Outcome {
    let cutoff = 20;
    let mut worst_n = 0.0f64;
    for r in [0.1, 0.25, 0.4, 0.5] {
        for phi in [0.0, 0.7, 2.1] {
            let mut s = QuantumStateCv::<0>::vacuum(1, cutoff);
            s.displace(0, r, phi).unwrap();
            worst_n = worst_n.max((s.mean_photons(0) - r * r).abs());
            let mut s = QuantumStateCv::<0>::vacuum(1, cutoff);
            s.squeeze(0, r, phi).unwrap();
            worst_n = worst_n.max((s.mean_photons(0) - r.sinh().powi(2)).abs());
        }
    }
    let mut worst_bs = 0.0f64;
    for (theta, phi) in [(0.3, 0.0), (FRAC_PI_2 / 2.0, 1.1), (1.2, -0.4)] {
        let mut s = QuantumStateCv::<0>::vacuum(2, cutoff);
        s.displace(0, 0.5, 0.3).unwrap();
        s.squeeze(1, 0.3, 0.0).unwrap();
        let before = s.mean_photons(0) + s.mean_photons(1);
        s.beamsplitter(0, 1, theta, phi).unwrap();
        worst_bs = worst_bs.max((s.mean_photons(0) + s.mean_photons(1) - before).abs());
    }
    // diagonal in the number basis: support untouched, |amplitude| stays 1
    let mut invariant = true;
    for (n0, n1) in [(0, 0), (1, 0), (3, 2), (7, 5), (19, 19)] {
        for cross in [false, true] {
            let mut s = QuantumStateCv::<0>::fock(&[n0, n1], cutoff);
            let before = s.planes.clone();
            if cross {
                s.cross_kerr(0, 1, 0.37).unwrap();
            } else {
                s.kerr(0, 0.37).unwrap();
                s.kerr(1, -1.3).unwrap();
            }
            let idx = n0 * cutoff + n1;
            for b in 0..s.planes.dim {
                let a = s.planes.get::<0>(b).norm_sqr().v;
                if b == idx {
                    invariant &= (a - 1.0).abs() <= 4.0 * f64::EPSILON;
                } else {
                    invariant &= a == 0.0 && before.get::<0>(b).norm_sqr().v == 0.0;
                }
            }
        }
    }
    let pass = worst_n < C5_PHOTON && worst_bs < C5_BS && invariant;
    outcome(
        pass,
        format!(
            "cutoff {cutoff}: worst <n> err {worst_n:.1e} (limit {C5_PHOTON:.0e}), beamsplitter drift {worst_bs:.1e} (limit {C5_BS:.0e}), kerr/cross-kerr number basis {}",
            if invariant { "invariant" } else { "NOT invariant" }
        ),
    )
}

fn desk_config(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: DESK_EPOCHS,
        batch_size: 64,
        seed,
        ..TrainConfig::dv()
    }
}

fn l2_of(summary: &MultiRunSummary) -> Vec<f64> {
    summary
        .runs
        .iter()
        .map(|r| r.errors.first().map_or(f64::NAN, |e| e.l2))
        .collect()
}

fn fmt_list(v: &[f64], style: &str) -> String {
    v.iter()
        .map(|x| match style {
            "pct" => format!("{x:.1}%"),
            _ => format!("{x:.3}"),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn c6_helmholtz_desk(dv_run: &mut Option<RunRecord>) -> Outcome {
    let p = PdeProblem::new(ProblemKind::Helmholtz);
    let m = dv_model(TopologyKind::Cascade, Embedding::Angle, 2, 1);
    let s = multi_run(&m, &p, &desk_config(0), DESK_SEEDS, None).unwrap();
    let ratios: Vec<f64> = s
        .runs
        .iter()
        .map(|r| r.record.final_loss().unwrap_or(f64::NAN) / r.record.history[0].total)
        .collect();
    let l2 = l2_of(&s);
    *dv_run = Some(s.runs[0].record.clone());
    let pass = ratios.iter().all(|&r| r < C6_LOSS_RATIO) && l2.iter().all(|&e| e < C6_L2);
    outcome(
        pass,
        format!(
            "{DESK_EPOCHS} epochs, seeds 0..{DESK_SEEDS}: final/first loss {} (limit {C6_LOSS_RATIO}), u L2 {} (limit {C6_L2}%)",
            fmt_list(&ratios, ""),
            fmt_list(&l2, "pct")
        ),
    )
}

fn c6_paper() -> Outcome {
    let p = PdeProblem::new(ProblemKind::Helmholtz);
    let m = dv_model(TopologyKind::Cascade, Embedding::Angle, 2, 1);
    let cfg = TrainConfig {
        epochs: 20000,
        ..desk_config(0)
    };
    let s = multi_run(&m, &p, &cfg, 10, None).unwrap();
    let mean = s.l2.first().map_or(f64::NAN, |(_, st)| st.mean);
    outcome(mean < C6_PAPER_L2, format!("20000 epochs x 10 runs: mean u L2 {mean:.2}% (limit {C6_PAPER_L2}%)"))
}

fn c7_run(epochs: usize, runs: usize) -> MultiRunSummary {
    let p = PdeProblem::new(ProblemKind::ConvectionDiffusion);
    let m = dv_model(TopologyKind::CrossMesh, Embedding::Angle, 3, 1);
    let cfg = TrainConfig {
        epochs,
        ..desk_config(0)
    };
    multi_run(&m, &p, &cfg, runs, None).unwrap()
}

fn c7_convdiff_desk() -> Outcome {
    let s = c7_run(DESK_EPOCHS, DESK_SEEDS);
    let l2 = l2_of(&s);
    let mean = l2.iter().sum::<f64>() / l2.len() as f64;
    outcome(
        mean < C7_L2,
        format!(
            "{DESK_EPOCHS} epochs, seeds 0..{DESK_SEEDS}: u L2 {} mean {mean:.1}% (limit {C7_L2}%)",
            fmt_list(&l2, "pct")
        ),
    )
}

fn c7_paper() -> Outcome {
    let s = c7_run(20000, 10);
    let mean = s.l2.first().map_or(f64::NAN, |(_, st)| st.mean);
    outcome(mean < C7_PAPER_L2, format!("20000 epochs x 10 runs: mean u L2 {mean:.2}% (limit {C7_PAPER_L2}%)"))
}

/// Sample std / mean of the unweighted residual term over the last 500
/// epochs.
fn residual_rsd(r: &RunRecord) -> f64 {
    let k = r.term_names.iter().position(|n| n == "residual").unwrap();
    let tail: Vec<f64> = r.history[r.history.len().saturating_sub(500)..]
        .iter()
        .map(|e| e.terms[k])
        .collect();
    let st = qcpinn::train::Stats::of(&tail);
    st.std / st.mean
}

fn c8_cv_instability(dv_run: Option<&RunRecord>) -> Outcome {
    let p = PdeProblem::new(ProblemKind::Helmholtz);
    let dv_owned;
    let dv = match dv_run {
        Some(r) => r,
        None => {
            let m = dv_model(TopologyKind::Cascade, Embedding::Angle, 2, 1);
            dv_owned = train(&m, &p, &desk_config(0), None).unwrap();
            &dv_owned
        }
    };
    let m = cv_model(
        2,
        1,
        CvConfig {
            measurement: Measurement::Quadrature,
            nonlinearity: Nonlinearity::Kerr,
            parameterization: Parameterization::PhaseFree,
            ..CvConfig::default()
        },
    );
    let cfg = TrainConfig {
        lr: 1e-4,
        clip: 0.1,
        ..TrainConfig {
            epochs: DESK_EPOCHS,
            batch_size: 64,
            seed: 0,
            ..TrainConfig::cv()
        }
    };
    let cv = train(&m, &p, &cfg, None).unwrap();
    if let Some(reason) = &cv.aborted {
        return outcome(false, format!("CV run aborted: {reason}"));
    }
    let (a, b) = (residual_rsd(&cv), residual_rsd(dv));
    outcome(
        a > C8_RATIO * b,
        format!(
            "residual-loss rel. std over last 500 of {DESK_EPOCHS}: CV {a:.3}, DV {b:.3}, ratio {:.1} (limit > {C8_RATIO})",
            a / b
        ),
    )
}

fn c9_smoke() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (kind, n_in, n_out) in [(ProblemKind::Cavity, 3, 3), (ProblemKind::Wave, 2, 1)] {
        let p = PdeProblem::new(kind);
        let m = dv_model(TopologyKind::Cascade, Embedding::Angle, n_in, n_out);
        let cfg = TrainConfig {
            epochs: 200,
            ..desk_config(0)
        };
        let r = train(&m, &p, &cfg, None).unwrap();
        let totals: Vec<f64> = r.history.iter().map(|e| e.total).collect();
        let finite = r.aborted.is_none() && totals.len() == 200 && totals.iter().all(|v| v.is_finite());
        let head = totals[..20].iter().sum::<f64>() / 20.0;
        let tail = totals[totals.len() - 20..].iter().sum::<f64>() / 20.0;
        pass &= finite && tail < head;
        parts.push(format!("{kind} mean loss first 20 {head:.3e} -> last 20 {tail:.3e}"));
    }
    outcome(pass, format!("200-epoch smoke runs, finite and decreasing: {}", parts.join("; ")))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let paper = args.iter().any(|a| a == "--include-ignored" || a == "--ignored");
    let mut dv_run = None;
    let mut rows: Vec<(&str, Option<Outcome>)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!(
            "{name} {} {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        rows.push((name, Some(o)));
    };
    run("C1", &mut c1_parameter_counts);
    run("C2", &mut c2_structural_formulas);
    run("C3a", &mut c3a_jets);
    run("C3b", &mut c3b_model_gradient);
    run("C3c", &mut c3c_parameter_shift);
    run("C4", &mut c4_exact_residuals);
    run("C5", &mut c5_cv_physics);
    run("C6", &mut || c6_helmholtz_desk(&mut dv_run));
    run("C7", &mut c7_convdiff_desk);
    run("C8", &mut || c8_cv_instability(dv_run.as_ref()));
    run("C9", &mut c9_smoke);
    if paper {
        run("C6-paper", &mut c6_paper);
        run("C7-paper", &mut c7_paper);
    } else {
        for name in ["C6-paper", "C7-paper"] {
            println!("{name} SKIP paper preset (pass --include-ignored to run)");
            rows.push((name, None));
        }
    }
    let failed: Vec<&str> = rows
        .iter()
        .filter(|(_, o)| o.as_ref().is_some_and(|o| !o.pass))
        .map(|(n, _)| *n)
        .collect();
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED {}", failed.join(", "));
        ExitCode::FAILURE
    }
}

use qcpinn::dv::{Embedding, TopologyKind};
use qcpinn::nn::{load_checkpoint, save_checkpoint, Architecture, Baseline, HybridModel, ModelSpec};
use qcpinn::pde::{field_errors, predict, PdeProblem, ProblemKind, ReferenceGrid};
use qcpinn::train::{multi_run, train, TrainConfig};

fn cascade(n_in: usize, n_out: usize) -> HybridModel {
    HybridModel::new(ModelSpec {
        n_in,
        n_out,
        architecture: Architecture::Dv {
            topology: TopologyKind::Cascade,
            embedding: Embedding::Angle,
            qubits: 5,
            layers: 1,
        },
    })
    .unwrap()
}

fn short(epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size: 16,
        seed,
        ..TrainConfig::dv()
    }
}

#[test]
fn training_is_reproducible_per_seed() {
    let p = PdeProblem::new(ProblemKind::KleinGordon);
    let m = cascade(2, 1);
    let a = train(&m, &p, &short(15, 4), None).unwrap();
    let b = train(&m, &p, &short(15, 4), None).unwrap();
    let c = train(&m, &p, &short(15, 5), None).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.final_params, b.final_params);
    assert_ne!(a.final_params, c.final_params);
    assert_eq!(a.term_names, ["residual", "bc_left", "bc_right", "initial", "initial_rate"]);
}

#[test]
fn multi_run_matches_individual_runs() {
    let p = PdeProblem::new(ProblemKind::Helmholtz);
    let m = HybridModel::baseline(Baseline::Model2, 2, 1);
    let s = multi_run(&m, &p, &short(5, 10), 3, None).unwrap();
    for (i, run) in s.runs.iter().enumerate() {
        let solo = train(&m, &p, &short(5, 10 + i as u64), None).unwrap();
        assert_eq!(run.record.final_params, solo.final_params);
        let e = field_errors(&p, &m, &solo.final_params, None).unwrap();
        assert_eq!(run.errors, e);
    }
    assert_eq!(s.l2.len(), 1);
    assert!(s.final_loss.unwrap().mean.is_finite());
}

#[test]
fn checkpoint_round_trip_preserves_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let p = PdeProblem::new(ProblemKind::Cavity);
    let m = cascade(3, 3);
    let r = train(&m, &p, &short(3, 1), None).unwrap();
    let stem = dir.path().join("ckpt");
    save_checkpoint(&stem, &m, &r.final_params).unwrap();
    let (m2, params) = load_checkpoint(&stem).unwrap();
    assert_eq!(params, r.final_params);
    let pts = vec![vec![0.5, 0.2, 0.9], vec![10.0, 1.0, 0.0]];
    assert_eq!(predict(&m, &params, &pts).unwrap(), predict(&m2, &params, &pts).unwrap());
}

#[test]
fn cavity_errors_need_a_reference_grid() {
    let p = PdeProblem::new(ProblemKind::Cavity);
    let m = HybridModel::baseline(Baseline::Model2, 3, 3);
    let params = vec![0.0; m.param_count()];
    assert!(field_errors(&p, &m, &params, None).is_err());
    let csv = "t,x,y,u,v,p\n0,0,0,1,1,1\n0,0,1,1,2,3\n0,1,0,2,1,1\n0,1,1,1,1,-1\n";
    let grid = ReferenceGrid::from_reader(csv.as_bytes()).unwrap();
    // a zero model is off by exactly the reference norm
    let e = field_errors(&p, &m, &params, Some(&grid)).unwrap();
    assert!(e.iter().all(|f| (f.l2 - 100.0).abs() < 1e-12), "{e:?}");
    assert!(ReferenceGrid::from_reader("t,x,y,u,v,p\n0,0,0,1,1,1\n0,0,1,1,2,3\n0,1,0,2,1,1\n".as_bytes()).is_err());
}

mod common;

use cosegloc_core::fixtures::toy_instance;
use cosegloc_core::harness::{generate, run, BaselineMode, LabelingFile, SynthConfig};
use cosegloc_core::{assemble, brute_force, build_matrices, round, solve, Hyperparams, MetricsReport, SolverConfig};

#[test]
fn every_mode_labels_every_image() {
    let set = generate(&SynthConfig::default()).unwrap();
    for mode in BaselineMode::ALL {
        let out = run(mode, &set, &Hyperparams::default(), &SolverConfig::default()).unwrap();
        assert_eq!(out.labeling.images.len(), set.images.len(), "{mode}");
        let boxes = matches!(mode, BaselineMode::Joint | BaselineMode::Sal | BaselineMode::SalDisc);
        let labels = matches!(
            mode,
            BaselineMode::Joint | BaselineMode::B1 | BaselineMode::B2 | BaselineMode::B3
        );
        for im in &out.labeling.images {
            assert_eq!(im.chosen_box.is_some(), boxes, "{mode}");
            assert_eq!(im.labels.is_some(), labels, "{mode}");
        }
        assert_eq!(out.metrics.corloc.is_some(), boxes, "{mode}");
        assert_eq!(out.metrics.pixel_ap.is_some(), labels, "{mode}");
    }
}

#[test]
fn labeling_file_round_trips() {
    let set = toy_instance();
    let out = run(
        BaselineMode::Joint,
        &set,
        &Hyperparams::default(),
        &SolverConfig::default(),
    )
    .unwrap();
    let file = LabelingFile::new("joint", &out.labeling, out.metrics.clone());
    let back = LabelingFile::parse(file.to_json().as_bytes()).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.labeling(), out.labeling);
    assert_eq!(
        MetricsReport::evaluate(&back.labeling(), &set).pixel_ap,
        out.metrics.pixel_ap
    );
}

#[test]
fn joint_mode_localizes_planted_objects() {
    let hp = Hyperparams::default();
    let cfg = SolverConfig::default();
    let mut total = 0.0;
    for seed in 0..50 {
        let set = generate(&SynthConfig {
            seed,
            ..SynthConfig::default()
        })
        .unwrap();
        total += run(BaselineMode::Joint, &set, &hp, &cfg)
            .unwrap()
            .metrics
            .corloc
            .unwrap();
    }
    // measured 0.853 at the default configuration
    assert!(total / 50.0 >= 0.8, "mean CorLoc {}", total / 50.0);
}

#[test]
fn feasible_rounded_points_do_not_beat_the_integer_optimum() {
    let hp = Hyperparams::default();
    let (instances, _) = common::feasible_small_instances(50, &hp);
    let mut compared = 0;
    for (seed, set) in instances {
        let mats = build_matrices(&set, &hp).unwrap();
        let qp = assemble(&set, &mats, &hp).unwrap();
        let sol = solve(&qp.program, &SolverConfig::default()).unwrap();
        let u = round(sol.u.as_slice(), &set).to_vector(&qp.columns);
        if !qp.program.is_feasible(u.as_slice(), 1e-9) {
            continue;
        }
        compared += 1;
        let exact = brute_force(&set, &mats, &hp).unwrap();
        assert!(qp.program.objective(&u) >= exact.objective - 1e-9, "seed {seed}");
        assert!(sol.objective <= qp.program.objective(&u) + 1e-6, "seed {seed}");
    }
    assert!(compared > 0);
}

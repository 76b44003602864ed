mod common;

use std::time::Instant;

use cosegloc_core::{assemble, brute_force, build_matrices, solve, Hyperparams, SolverConfig, Status};

#[test]
fn recovers_kkt_constructed_minimizers() {
    let cfg = SolverConfig::default();
    for seed in 0..100 {
        let (qp, u_star) = common::kkt_program(seed);
        let sol = solve(&qp, &cfg).unwrap();
        assert_eq!(sol.status, Status::Converged, "seed {seed}");
        let err = (&sol.u - &u_star).amax();
        assert!(err <= 1e-5, "seed {seed}: |u - u*| = {err:e}");
    }
}

#[test]
fn equal_seeds_give_identical_output() {
    for seed in 0..10 {
        let (qp, _) = common::kkt_program(seed);
        let cfg = SolverConfig {
            seed,
            ..SolverConfig::default()
        };
        let a = solve(&qp, &cfg).unwrap();
        let b = solve(&qp, &cfg).unwrap();
        assert_eq!(a.u.as_slice(), b.u.as_slice());
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.iterations, b.iterations);
    }
}

#[test]
fn relaxation_bounds_integer_optimum() {
    let hp = Hyperparams::default();
    let cfg = SolverConfig::default();
    let start = Instant::now();
    let (instances, _) = common::feasible_small_instances(50, &hp);
    for (seed, set) in instances {
        let mats = build_matrices(&set, &hp).unwrap();
        let qp = assemble(&set, &mats, &hp).unwrap();
        let relaxed = solve(&qp.program, &cfg).unwrap();
        assert_eq!(relaxed.status, Status::Converged, "seed {seed}");
        let exact = brute_force(&set, &mats, &hp).unwrap();
        assert!(
            relaxed.objective <= exact.objective + 1e-6,
            "seed {seed}: relaxed {} > exact {}",
            relaxed.objective,
            exact.objective
        );
    }
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn rounded_brute_force_point_scores_its_objective() {
    // the assembled objective and the term-by-term energy agree at the optimum
    let hp = Hyperparams::default();
    let (instances, _) = common::feasible_small_instances(10, &hp);
    for (seed, set) in instances {
        let mats = build_matrices(&set, &hp).unwrap();
        let qp = assemble(&set, &mats, &hp).unwrap();
        let exact = brute_force(&set, &mats, &hp).unwrap();
        let u = exact.labeling.to_vector(&qp.columns);
        let via_program = qp.program.objective(&u);
        assert!(
            (via_program - exact.objective).abs() <= 1e-9 * (1.0 + exact.objective.abs()),
            "seed {seed}"
        );
        assert!(qp.program.is_feasible(u.as_slice(), 1e-9), "seed {seed}");
    }
}

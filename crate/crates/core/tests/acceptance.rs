//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use cosegloc_core::assembly::Variable;
use cosegloc_core::fixtures::toy_instance;
use cosegloc_core::harness::{box_iou, corloc, generate, pixel_metrics, run, BaselineMode, SynthConfig};
use cosegloc_core::linalg::min_eigenvalue;
use cosegloc_core::matrices::laplacian_blocks;
use cosegloc_core::oracle::{box_copies, explicit_constraints_hold};
use cosegloc_core::{
    assemble, brute_force, build_matrices, diffrac_matrix, ridge_loss_min, solve, Hyperparams, ImageLabeling, Labeling,
    Rect, SolverConfig, Status,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ridge_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = common::rng(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(2..=15);
        let d = r.random_range(1..=8);
        let beta = 10f64.powf(r.random_range(-3.0..2.0));
        let x = common::random_design(&mut r, n, d);
        let y = DVector::from_fn(n, |_, _| {
            if r.random_bool(0.5) {
                1.0
            } else {
                r.random_range(0.0..1.0)
            }
        });
        let a = diffrac_matrix(&x, beta).map_err(|e| e.to_string())?.cost(&y);
        let b = ridge_loss_min(&x, &y, beta).map_err(|e| e.to_string())?;
        worst = worst.max((a - b).abs() / b.abs().max(1e-300));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-8 && secs < 5.0,
        format!("max relative error {worst:.2e}, {secs:.2}s"),
    )
}

fn psd_suite() -> Outcome {
    let hp = Hyperparams::default();
    let mut worst_ratio = f64::INFINITY;
    let mut worst_null = 0.0f64;
    for seed in 0..50 {
        let mut r = common::rng(100 + seed);
        let set = generate(&SynthConfig {
            images: r.random_range(1..=4),
            superpixels_per_image: r.random_range(2..=10),
            boxes_per_image: r.random_range(1..=4),
            feature_dim: r.random_range(1..=6),
            seed,
            ..SynthConfig::default()
        })
        .map_err(|e| e.to_string())?;
        let mats = build_matrices(&set, &hp).map_err(|e| e.to_string())?;
        let qp = assemble(&set, &mats, &hp).map_err(|e| e.to_string())?;
        let mut all: Vec<DMatrix<f64>> = vec![mats.d_s.clone(), mats.d_b.clone(), qp.program.quad];
        all.extend(laplacian_blocks(&set, &hp).into_iter().map(|b| b.matrix));
        for m in &all {
            let scale = m.trace() / m.nrows() as f64;
            let min = min_eigenvalue(m);
            if min < 0.0 {
                if scale <= 0.0 {
                    return Err(format!("seed {seed}: negative eigenvalue {min:e} with zero trace"));
                }
                worst_ratio = worst_ratio.min(min / scale);
            }
        }
        for d in [&mats.d_s, &mats.d_b] {
            worst_null = worst_null.max((d * DVector::from_element(d.nrows(), 1.0)).amax());
        }
    }
    let ratio = if worst_ratio.is_finite() { worst_ratio } else { 0.0 };
    check(
        ratio >= -1e-8 && worst_null <= 1e-8,
        format!("min eigenvalue / (trace/dim) {ratio:.2e}, max |D*1| {worst_null:.2e}"),
    )
}

fn toy_golden() -> Outcome {
    let set = toy_instance();
    let hp = Hyperparams {
        gamma: 0.1,
        ..Hyperparams::default()
    };
    let mats = build_matrices(&set, &hp).map_err(|e| e.to_string())?;
    let dump = assemble(&set, &mats, &hp)
        .map_err(|e| e.to_string())?
        .dump_constraints();
    let lines: Vec<&str> = dump.lines().collect();
    let expected = [
        "0.3*z[0,0] - 1*y[0,0] - 1*y[0,2] - 1*y[0,3] <= 0",
        "1*y[0,0] + 1*y[0,2] + 1*y[0,3] - 2.7*z[0,0] <= 0",
        "2*y[0,0] - 1*z[0,0] - 1*z[0,1] <= 0",
        "1*y[0,1] - 1*z[0,1] <= 0",
        "1*y[0,2] - 1*z[0,0] <= 0",
        "2*y[0,3] - 1*z[0,0] - 1*z[0,1] <= 0",
        "1*z[0,0] + 1*z[0,1] = 1",
    ];
    let missing: Vec<&str> = expected.iter().copied().filter(|e| !lines.contains(e)).collect();
    check(
        missing.is_empty(),
        if missing.is_empty() {
            format!(
                "all {} relations present in a {}-line dump",
                expected.len(),
                lines.len()
            )
        } else {
            format!("missing {missing:?}")
        },
    )
}

fn relaxation_lower_bound() -> Outcome {
    let start = Instant::now();
    let hp = Hyperparams::default();
    let cfg = SolverConfig::default();
    let (instances, skipped) = common::feasible_small_instances(50, &hp);
    let mut worst = f64::NEG_INFINITY;
    for (seed, set) in &instances {
        let mats = build_matrices(set, &hp).map_err(|e| e.to_string())?;
        let qp = assemble(set, &mats, &hp).map_err(|e| e.to_string())?;
        let relaxed = solve(&qp.program, &cfg).map_err(|e| e.to_string())?;
        if relaxed.status != Status::Converged {
            return Err(format!("seed {seed}: solver status {}", relaxed.status));
        }
        let exact = brute_force(set, &mats, &hp).map_err(|e| e.to_string())?;
        worst = worst.max(relaxed.objective - exact.objective);
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-6 && secs < 60.0,
        format!(
            "max(relaxed - exact) {worst:.2e} over {} instances ({skipped} integer-infeasible seeds skipped), {secs:.2}s",
            instances.len()
        ),
    )
}

fn reduction_equivalence() -> Outcome {
    let hp = Hyperparams::default();
    let mut discrepancies = 0u64;
    let mut checked = 0u64;
    for seed in 0..20 {
        let set = common::small_instance(seed);
        let mats = build_matrices(&set, &hp).map_err(|e| e.to_string())?;
        let qp = assemble(&set, &mats, &hp).map_err(|e| e.to_string())?;
        let offsets: Vec<usize> = (0..set.images.len()).map(|i| qp.columns.y(i, 0)).collect();
        for (i, image) in set.images.iter().enumerate() {
            let (n, m) = (image.superpixels.len(), image.boxes.len());
            for yb in 0..1u64 << n {
                for zb in 0..1u64 << m {
                    let y: Vec<bool> = (0..n).map(|k| yb >> k & 1 == 1).collect();
                    let z: Vec<bool> = (0..m).map(|k| zb >> k & 1 == 1).collect();
                    let mut u = DVector::zeros(qp.dim());
                    for j in 0..n {
                        u[qp.columns.y(i, j)] = f64::from(u8::from(y[j]));
                    }
                    for b in 0..m {
                        u[qp.columns.z(i, b)] = f64::from(u8::from(z[b]));
                    }
                    let mine = |col: usize| match qp.columns.variable(col) {
                        Variable::Superpixel { image, .. } | Variable::Box { image, .. } => image == i,
                    };
                    let u = u.as_slice();
                    let rows_ok = qp
                        .program
                        .ineq
                        .iter()
                        .filter(|r| r.terms.iter().all(|&(c, _)| mine(c)))
                        .all(|r| r.eval(u) <= r.rhs + 1e-12)
                        && qp
                            .program
                            .eq
                            .iter()
                            .filter(|r| r.terms.iter().all(|&(c, _)| mine(c)))
                            .all(|r| (r.eval(u) - r.rhs).abs() <= 1e-12)
                        && (0..n).all(|j| u[offsets[i] + j] <= qp.program.upper[offsets[i] + j]);
                    let explicit = explicit_constraints_hold(image, hp.gamma, &y, &z, &box_copies(image, &y));
                    if rows_ok != explicit {
                        discrepancies += 1;
                    }
                    checked += 1;
                }
            }
        }
    }
    check(
        discrepancies == 0,
        format!("{discrepancies} discrepancies over {checked} binary assignments"),
    )
}

fn kkt_recovery() -> Outcome {
    let cfg = SolverConfig::default();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let (qp, u_star) = common::kkt_program(seed);
        let sol = solve(&qp, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max((&sol.u - &u_star).amax());
    }
    let mut identical = true;
    for seed in 0..10 {
        let (qp, _) = common::kkt_program(1000 + seed);
        let cfg = SolverConfig {
            seed,
            ..SolverConfig::default()
        };
        let a = solve(&qp, &cfg).map_err(|e| e.to_string())?;
        let b = solve(&qp, &cfg).map_err(|e| e.to_string())?;
        identical &= a.u.as_slice() == b.u.as_slice()
            && a.objective.to_bits() == b.objective.to_bits()
            && a.iterations == b.iterations;
    }
    check(
        worst <= 1e-5 && identical,
        format!("max |u - u*| {worst:.2e}, repeated runs bit-identical: {identical}"),
    )
}

fn planted_trends() -> Outcome {
    let hp = Hyperparams::default();
    let cfg = SolverConfig::default();
    let seeds = 50;
    let mut corloc_sum = [0.0; 3];
    let mut ap_sum = [0.0; 3];
    for seed in 0..seeds {
        let set = generate(&SynthConfig {
            separation: 5.0,
            seed,
            ..SynthConfig::default()
        })
        .map_err(|e| e.to_string())?;
        for (k, mode) in [BaselineMode::Joint, BaselineMode::Sal, BaselineMode::SalDisc]
            .into_iter()
            .enumerate()
        {
            let out = run(mode, &set, &hp, &cfg).map_err(|e| e.to_string())?;
            corloc_sum[k] += out.metrics.corloc.ok_or("missing CorLoc")?;
        }
        for (k, mode) in [BaselineMode::Joint, BaselineMode::B3, BaselineMode::B1]
            .into_iter()
            .enumerate()
        {
            let out = run(mode, &set, &hp, &cfg).map_err(|e| e.to_string())?;
            ap_sum[k] += out.metrics.pixel_ap.ok_or("missing pixel AP")?;
        }
    }
    let pts = |v: f64| 100.0 * v / seeds as f64;
    let [joint_cl, sal_cl, sal_disc_cl] = corloc_sum.map(pts);
    let [joint_ap, b3_ap, b1_ap] = ap_sum.map(pts);
    let trends = [
        joint_cl >= sal_cl + 5.0,
        joint_cl >= sal_disc_cl + 5.0,
        b3_ap >= b1_ap + 2.0,
        joint_ap >= b3_ap + 2.0,
    ];
    check(
        trends.iter().all(|&t| t),
        format!(
            "CorLoc joint {joint_cl:.1} / sal {sal_cl:.1} / sal_disc {sal_disc_cl:.1}; \
             AP joint {joint_ap:.1} / b3 {b3_ap:.1} / b1 {b1_ap:.1}; \
             joint>sal+5 {}, joint>sal_disc+5 {}, b3>b1+2 {}, joint>b3+2 {}",
            trends[0], trends[1], trends[2], trends[3]
        ),
    )
}

fn metric_cases() -> Outcome {
    let a = Rect::new(0.0, 0.0, 10.0, 10.0);
    let shifted = Rect::new(5.0, 0.0, 10.0, 10.0);
    let half = Rect::new(0.0, 0.0, 20.0, 10.0);
    let p6 = Rect::new(0.0, 0.0, 10.0, 6.0);
    let p4 = Rect::new(0.0, 0.0, 10.0, 4.0);

    let mut set = toy_instance();
    for (sp, fg) in set.images[0]
        .superpixels
        .iter_mut()
        .zip([true, true, false, false, false])
    {
        sp.gt_foreground = Some(fg);
    }
    let labels = |l: [bool; 5]| Labeling {
        images: vec![ImageLabeling {
            chosen_box: None,
            labels: Some(l.to_vec()),
            relaxed_y: vec![],
            relaxed_z: vec![],
        }],
    };
    let none = pixel_metrics(&labels([false; 5]), &set).map_err(|e| e.to_string())?;
    let partial = pixel_metrics(&labels([true, false, false, false, false]), &set).map_err(|e| e.to_string())?;
    let perfect = pixel_metrics(&labels([true, true, false, false, false]), &set).map_err(|e| e.to_string())?;

    let cases = [
        (
            "IoU 0.5 is not localized",
            corloc(&[half], &[a]) == 0.0 && box_iou(&half, &a) == 0.5,
        ),
        ("IoU 1/3", box_iou(&a, &shifted) == 1.0 / 3.0),
        ("CorLoc of IoUs 0.6, 0.4", corloc(&[p6, p4], &[a, a]) == 0.5),
        ("all background on 40% foreground", none == (0.6, 0.0)),
        ("half recall", partial == (0.8, 0.5)),
        ("perfect labels", perfect == (1.0, 1.0)),
    ];
    let failed: Vec<&str> = cases.iter().filter(|(_, ok)| !ok).map(|(name, _)| *name).collect();
    check(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} exact cases", cases.len())
        } else {
            format!("failed: {failed:?}")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("ridge equivalence", ridge_equivalence),
        ("PSD suite", psd_suite),
        ("toy constraint rows", toy_golden),
        ("relaxation lower bound", relaxation_lower_bound),
        ("reduction equivalence", reduction_equivalence),
        ("solver KKT recovery and determinism", kkt_recovery),
        ("planted recovery trends", planted_trends),
        ("metric cases", metric_cases),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

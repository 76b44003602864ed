#![allow(dead_code)]

use cosegloc_core::harness::{generate, SynthConfig};
use cosegloc_core::{
    brute_force, build_matrices, DesignMatrix, Error, Hyperparams, InstanceSet, LinearRow, QuadProgram,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_design(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DesignMatrix {
    DesignMatrix::new(DMatrix::from_fn(n, d, |_, _| gaussian(rng))).unwrap()
}

/// A planted instance with at most 3 images, 6 superpixels and 3 boxes per image.
pub fn small_instance(seed: u64) -> InstanceSet {
    let mut r = rng(seed ^ 0x5eed);
    let cfg = SynthConfig {
        images: r.random_range(1..=3),
        superpixels_per_image: r.random_range(3..=6),
        boxes_per_image: r.random_range(1..=3),
        feature_dim: r.random_range(2..=3),
        seed,
        ..SynthConfig::default()
    };
    generate(&cfg).unwrap()
}

/// The first `count` small instances whose integer program is feasible,
/// together with the number of seeds skipped.
pub fn feasible_small_instances(count: usize, hp: &Hyperparams) -> (Vec<(u64, InstanceSet)>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    let mut seed = 0;
    while out.len() < count {
        let set = small_instance(seed);
        let mats = build_matrices(&set, hp).unwrap();
        match brute_force(&set, &mats, hp) {
            Ok(_) => out.push((seed, set)),
            Err(Error::Infeasible(_)) => skipped += 1,
            Err(e) => panic!("seed {seed}: {e}"),
        }
        seed += 1;
    }
    (out, skipped)
}

/// A strictly convex program built from its optimality conditions, so the
/// minimizer `u*` is known in advance.
///
/// Some coordinates sit at a bound, some inequality rows are active, and
/// all multipliers of active constraints are strictly positive.
pub fn kkt_program(seed: u64) -> (QuadProgram, DVector<f64>) {
    let mut r = rng(seed);
    let n = r.random_range(2..=8);
    let a = DMatrix::from_fn(n, n, |_, _| gaussian(&mut r));
    let quad = a.transpose() * &a / n as f64 + DMatrix::identity(n, n) * 0.5;

    let u_star = DVector::from_fn(n, |_, _| match r.random_range(0..4) {
        0 => 0.0,
        1 => 1.0,
        _ => r.random_range(0.1..0.9),
    });

    // gradient of u^T Q u + c^T u is 2 Q u + c; collect the multiplier terms
    let mut pull = DVector::<f64>::zeros(n);
    let mut ineq = Vec::new();
    for _ in 0..r.random_range(0..=3) {
        let terms: Vec<(usize, f64)> = (0..n).map(|j| (j, gaussian(&mut r))).collect();
        let value: f64 = terms.iter().map(|&(j, v)| v * u_star[j]).sum();
        if r.random_bool(0.5) {
            let lambda = r.random_range(0.5..2.0);
            for &(j, v) in &terms {
                pull[j] += lambda * v;
            }
            ineq.push(LinearRow::new(terms, value));
        } else {
            ineq.push(LinearRow::new(terms, value + r.random_range(0.2..1.0)));
        }
    }
    let mut eq = Vec::new();
    if r.random_bool(0.5) {
        let terms: Vec<(usize, f64)> = (0..n).map(|j| (j, gaussian(&mut r))).collect();
        let value: f64 = terms.iter().map(|&(j, v)| v * u_star[j]).sum();
        let nu = gaussian(&mut r);
        for &(j, v) in &terms {
            pull[j] += nu * v;
        }
        eq.push(LinearRow::new(terms, value));
    }
    for j in 0..n {
        let w = r.random_range(0.5..2.0);
        if u_star[j] == 0.0 {
            pull[j] -= w;
        } else if u_star[j] == 1.0 {
            pull[j] += w;
        }
    }
    let linear = -(&quad * &u_star * 2.0) - pull;
    let mut qp = QuadProgram::unit_box(quad, linear);
    qp.ineq = ineq;
    qp.eq = eq;
    (qp, u_star)
}

//! Exhaustive search over the integer feasible set, using the explicit-copy
//! constraint transcription and a term-by-term objective.

use std::cmp::Ordering;

use nalgebra::DVector;

use crate::assembly::{ImageLabeling, Labeling};
use crate::error::{Error, Result};
use crate::instance::{Hyperparams, ImageInstance, InstanceSet};
use crate::matrices::ProblemMatrices;
use crate::oracle::{box_copies, explicit_constraints_hold, joint_energy};

/// Upper bound on `prod_i m_i 2^{n_i}`.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub labeling: Labeling,
    pub objective: f64,
    /// Number of feasible integer assignments visited.
    pub feasible_count: u64,
}

/// One image's feasible `(y, chosen box)` pairs, in lexicographic `(y, z)` order.
fn feasible_assignments(image: &ImageInstance, gamma: f64) -> Vec<(Vec<bool>, usize)> {
    let n = image.superpixels.len();
    let m = image.boxes.len();
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << n) {
        // most significant bit first so the order is lexicographic in y
        let y: Vec<bool> = (0..n).map(|j| bits >> (n - 1 - j) & 1 == 1).collect();
        let x = box_copies(image, &y);
        // one-hot z in lexicographic order: the last box set first
        for chosen in (0..m).rev() {
            let z: Vec<bool> = (0..m).map(|b| b == chosen).collect();
            if explicit_constraints_hold(image, gamma, &y, &z, &x) {
                out.push((y.clone(), chosen));
            }
        }
    }
    out
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Exact minimizer of the joint energy over binary `y` and one-hot `z`.
///
/// Ties in energy (relative `1e-12`) go to the lexicographically smallest
/// `[y; z]`.
pub fn brute_force(set: &InstanceSet, mats: &ProblemMatrices, hp: &Hyperparams) -> Result<BruteForceResult> {
    mats.check_against(set)?;
    let combinations: f64 = set
        .images
        .iter()
        .map(|im| im.boxes.len() as f64 * 2f64.powi(im.superpixels.len() as i32))
        .product();
    if combinations > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            combinations,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    let per_image: Vec<Vec<(Vec<bool>, usize)>> =
        set.images.iter().map(|im| feasible_assignments(im, hp.gamma)).collect();
    if let Some(i) = per_image.iter().position(|f| f.is_empty()) {
        return Err(Error::Infeasible(format!(
            "image {i} has no integer assignment satisfying the box constraints"
        )));
    }

    let n_total = set.n_total();
    let m_total = set.m_total();
    let mut y_off = Vec::new();
    let mut z_off = Vec::new();
    let (mut ny, mut nz) = (0, 0);
    for im in &set.images {
        y_off.push(ny);
        z_off.push(nz);
        ny += im.superpixels.len();
        nz += im.boxes.len();
    }

    let mut choice = vec![0usize; per_image.len()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut best_choice = choice.clone();
    let mut feasible_count = 0u64;
    loop {
        let mut y = DVector::zeros(n_total);
        let mut z = DVector::zeros(m_total);
        for (i, &c) in choice.iter().enumerate() {
            let (ys, b) = &per_image[i][c];
            for (j, &v) in ys.iter().enumerate() {
                if v {
                    y[y_off[i] + j] = 1.0;
                }
            }
            z[z_off[i] + b] = 1.0;
        }
        let energy = joint_energy(mats, hp, &y, &z);
        feasible_count += 1;
        let key: Vec<f64> = y.iter().chain(z.iter()).copied().collect();
        let better = match &best {
            None => true,
            Some((e, k)) => {
                let tie = (energy - e).abs() <= 1e-12 * e.abs().max(1.0);
                if tie {
                    lexicographic(&key, k) == Ordering::Less
                } else {
                    energy < *e
                }
            }
        };
        if better {
            best = Some((energy, key));
            best_choice.clone_from(&choice);
        }

        // odometer over per-image feasible lists
        let mut i = 0;
        loop {
            if i == choice.len() {
                let (objective, _) = best.expect("at least one assignment");
                return Ok(BruteForceResult {
                    labeling: labeling_from(set, &per_image, &best_choice),
                    objective,
                    feasible_count,
                });
            }
            choice[i] += 1;
            if choice[i] < per_image[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn labeling_from(set: &InstanceSet, per_image: &[Vec<(Vec<bool>, usize)>], choice: &[usize]) -> Labeling {
    let images = set
        .images
        .iter()
        .enumerate()
        .map(|(i, im)| {
            let (y, b) = &per_image[i][choice[i]];
            ImageLabeling {
                chosen_box: Some(*b),
                labels: Some(y.clone()),
                relaxed_y: y.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect(),
                relaxed_z: (0..im.boxes.len()).map(|k| if k == *b { 1.0 } else { 0.0 }).collect(),
            }
        })
        .collect();
    Labeling { images }
}

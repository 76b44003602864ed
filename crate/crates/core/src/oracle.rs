//! Reference transcriptions used to cross-check the assembled program.
//!
//! These keep the per-box copies `x_i` explicit and evaluate the objective
//! term by term from the raw matrices, independently of [`crate::assembly`].

use nalgebra::DVector;

use crate::instance::{Hyperparams, ImageInstance};
use crate::matrices::ProblemMatrices;

/// Check one image's binary assignment against the box, superpixel,
/// projection, and one-box constraints with explicit `x`.
///
/// `x` holds one vector per box in member order; `y` and `z` are the
/// image's superpixel and box indicators.
pub fn explicit_constraints_hold(image: &ImageInstance, gamma: f64, y: &[bool], z: &[bool], x: &[Vec<bool>]) -> bool {
    let as_f = |b: bool| if b { 1.0 } else { 0.0 };
    let tol = 1e-12;

    // x_i = P_i y
    for (bx, xi) in image.boxes.iter().zip(x) {
        let members = bx.sorted_members();
        if members.len() != xi.len() || members.iter().zip(xi).any(|(&j, &v)| y[j] != v) {
            return false;
        }
    }
    // gamma |S_i| z_i <= sum_j x_ij <= (1 - gamma) |S_i| z_i
    for (i, xi) in x.iter().enumerate() {
        let size = xi.len() as f64;
        let count = xi.iter().filter(|&&v| v).count() as f64;
        let zi = as_f(z[i]);
        if gamma * size * zi > count + tol || count > (1.0 - gamma) * size * zi + tol {
            return false;
        }
    }
    // sum_{i: j in S_i} x_ij <= sum_{i: j in S_i} z_i
    for (j, &fg) in y.iter().enumerate() {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        let mut contained = false;
        for (i, bx) in image.boxes.iter().enumerate() {
            let members = bx.sorted_members();
            if let Ok(pos) = members.binary_search(&j) {
                contained = true;
                lhs += as_f(x[i][pos]);
                rhs += as_f(z[i]);
            }
        }
        if lhs > rhs + tol {
            return false;
        }
        // superpixels outside every box are background
        if !contained && fg {
            return false;
        }
    }
    // sum_i z_i = 1
    z.iter().filter(|&&v| v).count() == 1
}

/// `x_i = P_i y` for every box of an image.
pub fn box_copies(image: &ImageInstance, y: &[bool]) -> Vec<Vec<bool>> {
    image
        .boxes
        .iter()
        .map(|b| b.sorted_members().iter().map(|&j| y[j]).collect())
        .collect()
}

/// `y^T (D_s + alpha L_s) y + z^T D_b z + nu y^T s_s + mu z^T s_b`,
/// evaluated term by term.
pub fn joint_energy(mats: &ProblemMatrices, hp: &Hyperparams, y: &DVector<f64>, z: &DVector<f64>) -> f64 {
    let ds = y.dot(&(&mats.d_s * y));
    let ls = y.dot(&(&mats.l_s * y));
    let db = z.dot(&(&mats.d_b * z));
    ds + hp.alpha * ls + db + hp.nu * y.dot(&mats.s_s) + hp.mu * z.dot(&mats.s_b)
}

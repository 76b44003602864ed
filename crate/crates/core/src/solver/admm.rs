//! Operator-splitting (ADMM) iteration for box- and row-constrained convex
//! quadratic programs, followed by an active-set polishing step.
//!
//! The program is rewritten as
//!
//! ```text
//! minimize 1/2 x^T P x + q^T x   subject to  l <= A x <= h
//! ```
//!
//! with `P = 2Q`, and `A` stacking inequality rows, equality rows, and the
//! identity for variable bounds.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{SolverConfig, Status};
use crate::program::QuadProgram;

const SIGMA: f64 = 1e-6;
const RELAXATION: f64 = 1.6;
const RHO_INIT: f64 = 0.1;
const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
const RHO_EQ_SCALE: f64 = 1e3;
const ADAPT_EVERY: usize = 25;
const ADAPT_RATIO: f64 = 5.0;
const INFEASIBILITY_TOL: f64 = 1e-9;
const POLISH_REG: f64 = 1e-9;
const REFINE_STEPS: usize = 4;

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: DVector<f64>,
    pub dual: DVector<f64>,
    pub iterations: usize,
    pub status: Status,
}

struct Stacked {
    a: DMatrix<f64>,
    lower: DVector<f64>,
    upper: DVector<f64>,
    is_eq: Vec<bool>,
}

fn stack(qp: &QuadProgram) -> Stacked {
    let n = qp.dim();
    let rows = qp.ineq.len() + qp.eq.len() + n;
    let mut a = DMatrix::zeros(rows, n);
    let mut lower = DVector::zeros(rows);
    let mut upper = DVector::zeros(rows);
    let mut is_eq = vec![false; rows];
    let mut r = 0;
    for row in &qp.ineq {
        for &(j, v) in &row.terms {
            a[(r, j)] += v;
        }
        lower[r] = f64::NEG_INFINITY;
        upper[r] = row.rhs;
        r += 1;
    }
    for row in &qp.eq {
        for &(j, v) in &row.terms {
            a[(r, j)] += v;
        }
        lower[r] = row.rhs;
        upper[r] = row.rhs;
        is_eq[r] = true;
        r += 1;
    }
    for j in 0..n {
        a[(r, j)] = 1.0;
        lower[r] = qp.lower[j];
        upper[r] = qp.upper[j];
        is_eq[r] = qp.lower[j] == qp.upper[j];
        r += 1;
    }
    Stacked { a, lower, upper, is_eq }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

fn project(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

struct Factor {
    chol: Cholesky<f64, Dyn>,
}

fn factor(p: &DMatrix<f64>, a: &DMatrix<f64>, rho: &DVector<f64>, jitter: f64) -> Factor {
    let n = p.nrows();
    let mut k = p.clone();
    for j in 0..n {
        k[(j, j)] += SIGMA;
    }
    let scaled = DMatrix::from_fn(a.nrows(), n, |i, j| a[(i, j)] * rho[i]);
    k += a.transpose() * scaled;
    let mut shift = 0.0;
    loop {
        let mut attempt = k.clone();
        for j in 0..n {
            attempt[(j, j)] += shift;
        }
        if let Some(chol) = attempt.cholesky() {
            return Factor { chol };
        }
        shift = if shift == 0.0 { jitter } else { shift * 10.0 };
    }
}

fn rho_vector(base: f64, is_eq: &[bool]) -> DVector<f64> {
    DVector::from_iterator(
        is_eq.len(),
        is_eq.iter().map(|&e| if e { base * RHO_EQ_SCALE } else { base }),
    )
}

/// Primal infeasibility certificate from a dual step `dy`.
fn certifies_infeasibility(st: &Stacked, dy: &DVector<f64>) -> bool {
    let norm = inf_norm(dy);
    if norm <= 1e-12 {
        return false;
    }
    let aty = st.a.transpose() * dy;
    if inf_norm(&aty) > INFEASIBILITY_TOL * norm {
        return false;
    }
    let mut support = 0.0;
    for i in 0..dy.len() {
        let d = dy[i];
        if d > 0.0 {
            if st.upper[i].is_infinite() {
                return false;
            }
            support += st.upper[i] * d;
        } else if d < 0.0 {
            if st.lower[i].is_infinite() {
                return false;
            }
            support += st.lower[i] * d;
        }
    }
    support < -INFEASIBILITY_TOL * norm
}

fn dual_residual(p: &DMatrix<f64>, q: &DVector<f64>, a: &DMatrix<f64>, x: &DVector<f64>, dual: &DVector<f64>) -> f64 {
    inf_norm(&(p * x + q + a.transpose() * dual))
}

/// Stationarity residual `||P x + q + A^T y||_inf` of a program.
pub(crate) fn stationarity(qp: &QuadProgram, x: &DVector<f64>, dual: &DVector<f64>) -> f64 {
    let p = &qp.quad + qp.quad.transpose();
    dual_residual(&p, &qp.linear, &stack(qp).a, x, dual)
}

pub(crate) fn run(qp: &QuadProgram, cfg: &SolverConfig) -> Outcome {
    let n = qp.dim();
    // P = 2 sym(Q)
    let p = &qp.quad + qp.quad.transpose();
    let q = qp.linear.clone();
    let st = stack(qp);
    let m = st.a.nrows();

    let mut rho = RHO_INIT;
    let mut rho_vec = rho_vector(rho, &st.is_eq);
    let mut fac = factor(&p, &st.a, &rho_vec, cfg.psd_jitter);

    let mut x = DVector::zeros(n);
    let mut z = DVector::from_iterator(m, (0..m).map(|i| project(0.0, st.lower[i], st.upper[i])));
    let mut y = DVector::zeros(m);
    let mut status = Status::IterationLimit;
    let mut iterations = cfg.max_iters;

    for k in 1..=cfg.max_iters {
        let rhs = &x * SIGMA - &q + st.a.transpose() * (rho_vec.component_mul(&z) - &y);
        let x_tilde = fac.chol.solve(&rhs);
        let z_tilde = &st.a * &x_tilde;

        let x_next = &x_tilde * RELAXATION + &x * (1.0 - RELAXATION);
        let z_relaxed = &z_tilde * RELAXATION + &z * (1.0 - RELAXATION);
        let mut z_next = DVector::zeros(m);
        for i in 0..m {
            z_next[i] = project(z_relaxed[i] + y[i] / rho_vec[i], st.lower[i], st.upper[i]);
        }
        let y_prev = y.clone();
        y += rho_vec.component_mul(&(&z_relaxed - &z_next));
        x = x_next;
        z = z_next;

        let ax = &st.a * &x;
        let r_prim = inf_norm(&(&ax - &z));
        let px = &p * &x;
        let aty = st.a.transpose() * &y;
        let r_dual = inf_norm(&(&px + &q + &aty));

        if r_prim <= cfg.tol_primal * 0.1 && r_dual <= cfg.tol_dual * 0.1 {
            status = Status::Converged;
            iterations = k;
            break;
        }
        if k % ADAPT_EVERY == 0 {
            if certifies_infeasibility(&st, &(&y - &y_prev)) {
                status = Status::Infeasible;
                iterations = k;
                break;
            }
            let prim_scale = inf_norm(&ax).max(inf_norm(&z)).max(1e-12);
            let dual_scale = inf_norm(&px).max(inf_norm(&aty)).max(inf_norm(&q)).max(1e-12);
            let ratio = ((r_prim / prim_scale) / (r_dual / dual_scale).max(1e-30)).sqrt();
            let new_rho = (rho * ratio).clamp(RHO_MIN, RHO_MAX);
            if new_rho > rho * ADAPT_RATIO || new_rho < rho / ADAPT_RATIO {
                rho = new_rho;
                rho_vec = rho_vector(rho, &st.is_eq);
                fac = factor(&p, &st.a, &rho_vec, cfg.psd_jitter);
            }
        }
    }

    let mut out = Outcome {
        x,
        dual: y,
        iterations,
        status,
    };
    if status != Status::Infeasible {
        if let Some((px, py, sign_violation)) = polish(&p, &q, &st, &z, &out.dual) {
            let before = qp
                .max_violation(out.x.as_slice())
                .max(dual_residual(&p, &q, &st.a, &out.x, &out.dual));
            let after = qp
                .max_violation(px.as_slice())
                .max(dual_residual(&p, &q, &st.a, &px, &py))
                .max(sign_violation);
            if after <= before {
                out.x = px;
                out.dual = py;
            }
        }
    }
    out
}

/// Solve the equality-constrained problem on the active set guessed from
/// the ADMM iterate, with iterative refinement against the unregularized
/// system.
fn polish(
    p: &DMatrix<f64>,
    q: &DVector<f64>,
    st: &Stacked,
    z: &DVector<f64>,
    y: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>, f64)> {
    let n = p.nrows();
    let m = st.a.nrows();
    // (row, target value, required sign of the multiplier)
    let mut active: Vec<(usize, f64, f64)> = Vec::new();
    for i in 0..m {
        if st.is_eq[i] {
            active.push((i, st.lower[i], 0.0));
        } else if st.lower[i].is_finite() && z[i] - st.lower[i] < -y[i] {
            active.push((i, st.lower[i], -1.0));
        } else if st.upper[i].is_finite() && st.upper[i] - z[i] < y[i] {
            active.push((i, st.upper[i], 1.0));
        }
    }
    let k = active.len();
    let mut kkt = DMatrix::zeros(n + k, n + k);
    kkt.view_mut((0, 0), (n, n)).copy_from(p);
    for (r, &(i, _, _)) in active.iter().enumerate() {
        for j in 0..n {
            let v = st.a[(i, j)];
            kkt[(n + r, j)] = v;
            kkt[(j, n + r)] = v;
        }
    }
    let mut rhs = DVector::zeros(n + k);
    rhs.rows_mut(0, n).copy_from(&(-q));
    for (r, &(_, b, _)) in active.iter().enumerate() {
        rhs[n + r] = b;
    }
    let mut reg = kkt.clone();
    for j in 0..n {
        reg[(j, j)] += POLISH_REG;
    }
    for r in 0..k {
        reg[(n + r, n + r)] -= POLISH_REG;
    }
    let lu = reg.lu();
    let mut sol = lu.solve(&rhs)?;
    for _ in 0..REFINE_STEPS {
        let res = &rhs - &kkt * &sol;
        sol += lu.solve(&res)?;
    }
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let px = sol.rows(0, n).into_owned();
    let mut py = DVector::zeros(m);
    let mut sign_violation: f64 = 0.0;
    for (r, &(i, _, sign)) in active.iter().enumerate() {
        py[i] = sol[n + r];
        if sign != 0.0 {
            sign_violation = sign_violation.max((-sign * py[i]).max(0.0));
        }
    }
    Some((px, py, sign_violation))
}

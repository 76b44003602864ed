//! Convex solver for the relaxed program and an exhaustive integer oracle.

mod admm;
mod brute;

pub use brute::{brute_force, BruteForceResult, BRUTE_FORCE_LIMIT};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::program::QuadProgram;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Maximum allowed constraint violation.
    pub tol_primal: f64,
    /// Maximum allowed stationarity residual.
    pub tol_dual: f64,
    pub max_iters: usize,
    /// Reserved for randomized internals; the current method is deterministic.
    pub seed: u64,
    /// Diagonal shift tried when a factorization fails.
    pub psd_jitter: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            max_iters: 50_000,
            seed: 0,
            psd_jitter: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_primal > 0.0 && self.tol_dual > 0.0) {
            return Err(Error::Argument("solver tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be at least 1".into()));
        }
        if self.psd_jitter.is_nan() || self.psd_jitter <= 0.0 {
            return Err(Error::Argument("psd_jitter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    IterationLimit,
    Infeasible,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::IterationLimit => "iteration-limit",
            Status::Infeasible => "infeasible",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: DVector<f64>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: Status,
}

/// Minimize `u^T Q u + c^T u` over the program's constraints.
///
/// The returned point always lies within the variable bounds. When the
/// status is [`Status::Converged`], both residuals are within tolerance.
pub fn solve(qp: &QuadProgram, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    qp.check()?;
    if qp.dim() == 0 {
        return Ok(Solution {
            u: DVector::zeros(0),
            objective: 0.0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            iterations: 0,
            status: Status::Converged,
        });
    }
    let out = admm::run(qp, cfg);
    let mut u = out.x;
    for j in 0..u.len() {
        u[j] = u[j].max(qp.lower[j]).min(qp.upper[j]);
    }
    let primal_residual = qp.max_violation(u.as_slice());
    let dual_residual = admm::stationarity(qp, &u, &out.dual);
    let status = match out.status {
        Status::Infeasible => Status::Infeasible,
        _ if primal_residual <= cfg.tol_primal && dual_residual <= cfg.tol_dual => Status::Converged,
        _ => Status::IterationLimit,
    };
    Ok(Solution {
        objective: qp.objective(&u),
        u,
        primal_residual,
        dual_residual,
        iterations: out.iterations,
        status,
    })
}

/// `exact - relaxed`; negative values beyond tolerance signal a broken
/// lower bound.
pub fn relaxation_gap(relaxed: f64, exact: f64) -> f64 {
    exact - relaxed
}

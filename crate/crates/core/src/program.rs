//! A dense convex quadratic program over box-bounded variables:
//!
//! ```text
//! minimize    u^T Q u + c^T u
//! subject to  a_k^T u <= b_k     (inequality rows)
//!             e_k^T u  = f_k     (equality rows)
//!             lower <= u <= upper
//! ```
//!
//! Rows are stored sparsely since every constraint touches only a handful of
//! variables.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A sparse linear row `sum coeff * u[col]` compared against `rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LinearRow {
    pub fn new(terms: Vec<(usize, f64)>, rhs: f64) -> Self {
        LinearRow { terms, rhs }
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * u[j]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadProgram {
    pub quad: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub ineq: Vec<LinearRow>,
    pub eq: Vec<LinearRow>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl QuadProgram {
    /// A program with unit bounds `[0, 1]` and no rows.
    pub fn unit_box(quad: DMatrix<f64>, linear: DVector<f64>) -> Self {
        let n = linear.len();
        QuadProgram {
            quad,
            linear,
            ineq: Vec::new(),
            eq: Vec::new(),
            lower: DVector::zeros(n),
            upper: DVector::from_element(n, 1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn check(&self) -> Result<()> {
        let n = self.dim();
        if self.quad.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "quadratic term is {:?}, expected {n}x{n}",
                self.quad.shape()
            )));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Dimension("bounds do not match variable count".into()));
        }
        for row in self.ineq.iter().chain(&self.eq) {
            if let Some(&(j, _)) = row.terms.iter().find(|(j, _)| *j >= n) {
                return Err(Error::Dimension(format!("row references column {j} of {n}")));
            }
        }
        if self.lower.iter().zip(self.upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::Infeasible("a lower bound exceeds its upper bound".into()));
        }
        Ok(())
    }

    /// `u^T Q u + c^T u`.
    pub fn objective(&self, u: &DVector<f64>) -> f64 {
        u.dot(&(&self.quad * u)) + self.linear.dot(u)
    }

    /// Largest violation of any row or bound; zero when feasible.
    pub fn max_violation(&self, u: &[f64]) -> f64 {
        let ineq = self.ineq.iter().map(|r| (r.eval(u) - r.rhs).max(0.0));
        let eq = self.eq.iter().map(|r| (r.eval(u) - r.rhs).abs());
        let bounds = u
            .iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .map(|(&x, (&l, &h))| (l - x).max(x - h).max(0.0));
        ineq.chain(eq).chain(bounds).fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, u: &[f64], tol: f64) -> bool {
        self.max_violation(u) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn violation_accounts_for_every_kind() {
        let mut qp = QuadProgram::unit_box(DMatrix::zeros(2, 2), DVector::zeros(2));
        qp.ineq.push(LinearRow::new(vec![(0, 1.0), (1, 1.0)], 1.0));
        qp.eq.push(LinearRow::new(vec![(0, 1.0)], 0.5));
        assert_eq!(qp.max_violation(&[0.5, 0.5]), 0.0);
        assert!((qp.max_violation(&[0.5, 0.8]) - 0.3).abs() < 1e-15);
        assert!((qp.max_violation(&[0.2, 0.0]) - 0.3).abs() < 1e-15);
        assert!((qp.max_violation(&[0.5, -0.25]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn check_flags_bad_columns() {
        let mut qp = QuadProgram::unit_box(DMatrix::zeros(2, 2), DVector::zeros(2));
        qp.ineq.push(LinearRow::new(vec![(2, 1.0)], 1.0));
        assert!(matches!(qp.check(), Err(Error::Dimension(_))));
    }
}

//! Discriminative clustering with the square loss.
//!
//! For a design matrix `X` (n x d) and ridge parameter `beta`, the optimal
//! ridge-regression loss of fitting labels `y` with an unpenalized bias is a
//! quadratic form `y^T D y` with
//!
//! ```text
//! D = Pi (I_n - X (X^T Pi X + beta I_d)^-1 X^T) Pi,   Pi = I_n - 11^T / n
//! ```
//!
//! [`diffrac_matrix`] builds `D`; [`ridge_loss_min`] evaluates the ridge
//! problem directly so the two can be checked against each other.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An `n x d` feature matrix, one row per entity, `n >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix(DMatrix<f64>);

impl DesignMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() < 2 {
            return Err(Error::Argument(format!(
                "design matrix needs at least 2 rows, got {}",
                data.nrows()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("design matrix has non-finite entries".into()));
        }
        Ok(DesignMatrix(data))
    }

    /// Stack feature rows. All rows must share one dimension.
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let rows: Vec<&[f64]> = rows.into_iter().collect();
        let d = rows.first().map_or(0, |r| r.len());
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Dimension(format!(
                "feature row {i} has dimension {}, expected {d}",
                rows[i].len()
            )));
        }
        let data = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        DesignMatrix::new(data)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// The positive semi-definite matrix `D` together with the ridge parameter
/// it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffracMatrix {
    pub matrix: DMatrix<f64>,
    pub beta: f64,
}

impl DiffracMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `y^T D y`.
    pub fn cost(&self, y: &DVector<f64>) -> f64 {
        y.dot(&(&self.matrix * y))
    }
}

/// `I_n - 11^T / n`.
pub fn centering_projection(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::Argument("centering projection of size 0".into()));
    }
    let inv = 1.0 / n as f64;
    Ok(DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 - inv } else { -inv }))
}

/// Subtract the column means.
fn center_columns(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut centered = x.clone();
    let n = x.nrows() as f64;
    for mut col in centered.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
    }
    centered
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("beta must be positive, got {beta}")))
    }
}

/// Cholesky factor of `X^T Pi X + beta I_d`, given the centered `Pi X`.
fn ridge_gram(centered: &DMatrix<f64>, beta: f64) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let d = centered.ncols();
    let gram = centered.transpose() * centered + DMatrix::identity(d, d) * beta;
    gram.cholesky()
        .ok_or_else(|| Error::Argument("ridge system is not positive definite".into()))
}

pub fn diffrac_matrix(x: &DesignMatrix, beta: f64) -> Result<DiffracMatrix> {
    check_beta(beta)?;
    let n = x.rows();
    let centered = center_columns(x.as_matrix());
    let mut d = centering_projection(n)?;
    if x.cols() > 0 {
        let chol = ridge_gram(&centered, beta)?;
        // (X^T Pi X + beta I)^-1 (Pi X)^T
        let g = chol.solve(&centered.transpose());
        d -= &centered * g;
    }
    let matrix = crate::linalg::symmetrized(&d);
    Ok(DiffracMatrix { matrix, beta })
}

/// `min_{a, b} ||y - X a - b 1||^2 + beta ||a||^2`, solved in closed form.
pub fn ridge_loss_min(x: &DesignMatrix, y: &DVector<f64>, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if y.len() != x.rows() {
        return Err(Error::Dimension(format!(
            "label vector has length {}, design matrix has {} rows",
            y.len(),
            x.rows()
        )));
    }
    let xm = x.as_matrix();
    let n = x.rows() as f64;
    let weights = if x.cols() > 0 {
        let centered = center_columns(xm);
        let chol = ridge_gram(&centered, beta)?;
        chol.solve(&(centered.transpose() * y))
    } else {
        DVector::zeros(0)
    };
    let fitted = xm * &weights;
    let bias = (y - &fitted).sum() / n;
    let residual = y - fitted - DVector::from_element(y.len(), bias);
    Ok(residual.norm_squared() + beta * weights.norm_squared())
}

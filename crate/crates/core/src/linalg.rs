//! Dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = symmetrized(m);
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `(m + m^T) / 2`.
pub fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute difference between `m` and its transpose.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Whether the smallest eigenvalue is at least `-tol * trace / dim`.
pub fn is_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    let dim = m.nrows().max(1) as f64;
    let scale = (m.trace().abs() / dim).max(f64::MIN_POSITIVE);
    min_eigenvalue(m) >= -tol * scale
}

/// `x^T m x`.
pub fn quad_form(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(m * x))
}

/// Place square blocks along the diagonal of a zero matrix.
pub fn block_diagonal<'a>(blocks: impl IntoIterator<Item = &'a DMatrix<f64>>) -> DMatrix<f64> {
    let blocks: Vec<&DMatrix<f64>> = blocks.into_iter().collect();
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut offset = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((offset, offset), (k, k)).copy_from(b);
        offset += k;
    }
    out
}

//! Per-image superpixel similarity graphs and their normalized Laplacians.

use nalgebra::{DMatrix, DVector};

use crate::linalg::block_diagonal;

/// `W_ab = exp(-lambda_p |p_a - p_b|^2 - lambda_c |c_a - c_b|^2)`.
///
/// Entries below `threshold` are set to zero; the diagonal is always 1.
pub fn similarity_matrix(
    positions: &[[f64; 2]],
    colors: &[[f64; 3]],
    lambda_p: f64,
    lambda_c: f64,
    threshold: f64,
) -> DMatrix<f64> {
    assert_eq!(positions.len(), colors.len(), "one color per position");
    let n = positions.len();
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let mut w = DMatrix::identity(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let e = -lambda_p * sq(&positions[a], &positions[b]) - lambda_c * sq(&colors[a], &colors[b]);
            let v = e.exp();
            let v = if v < threshold { 0.0 } else { v };
            w[(a, b)] = v;
            w[(b, a)] = v;
        }
    }
    w
}

/// Normalized Laplacian of one image's similarity graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianBlock {
    pub image: usize,
    pub matrix: DMatrix<f64>,
    /// `Q^{1/2} 1`, the null direction of the block.
    pub sqrt_degrees: DVector<f64>,
}

/// `L = I - Q^{-1/2} W Q^{-1/2}` with `Q = diag(row sums of W)`.
pub fn normalized_laplacian(image: usize, w: &DMatrix<f64>) -> LaplacianBlock {
    let n = w.nrows();
    assert_eq!(n, w.ncols(), "similarity matrix must be square");
    let degrees: Vec<f64> = w.row_iter().map(|r| r.sum()).collect();
    assert!(
        degrees.iter().all(|&q| q > 0.0),
        "similarity rows must have positive sums"
    );
    let inv_sqrt: Vec<f64> = degrees.iter().map(|q| 1.0 / q.sqrt()).collect();
    let mut l = DMatrix::from_fn(n, n, |a, b| -inv_sqrt[a] * w[(a, b)] * inv_sqrt[b]);
    for a in 0..n {
        l[(a, a)] += 1.0;
    }
    let l = crate::linalg::symmetrized(&l);
    LaplacianBlock {
        image,
        matrix: l,
        sqrt_degrees: DVector::from_iterator(n, degrees.iter().map(|q| q.sqrt())),
    }
}

/// Block-diagonal `L_s`; blocks must be ordered by image index.
pub fn assemble_block_laplacian(blocks: &[LaplacianBlock]) -> DMatrix<f64> {
    debug_assert!(blocks.windows(2).all(|w| w[0].image < w[1].image));
    block_diagonal(blocks.iter().map(|b| &b.matrix))
}

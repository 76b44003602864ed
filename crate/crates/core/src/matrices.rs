//! Objective ingredients computed from an instance: discriminative matrices
//! for superpixels and boxes, the block Laplacian, and saliency costs.

use nalgebra::{DMatrix, DVector};

use crate::diffrac::{diffrac_matrix, DesignMatrix, DiffracMatrix};
use crate::error::{Error, Result};
use crate::graph::{assemble_block_laplacian, normalized_laplacian, similarity_matrix, LaplacianBlock};
use crate::instance::{saliency_to_cost, Hyperparams, InstanceSet};

#[derive(Debug, Clone)]
pub struct ProblemMatrices {
    /// Discriminative matrix over all superpixels of all images.
    pub d_s: DMatrix<f64>,
    /// Block-diagonal normalized Laplacian over superpixels.
    pub l_s: DMatrix<f64>,
    /// Discriminative matrix over all boxes of all images.
    pub d_b: DMatrix<f64>,
    /// Superpixel saliency costs.
    pub s_s: DVector<f64>,
    /// Box saliency costs.
    pub s_b: DVector<f64>,
}

impl ProblemMatrices {
    pub fn n_superpixels(&self) -> usize {
        self.s_s.len()
    }

    pub fn n_boxes(&self) -> usize {
        self.s_b.len()
    }

    pub fn check_against(&self, set: &InstanceSet) -> Result<()> {
        let (n, m) = (set.n_total(), set.m_total());
        let shapes = [
            ("D_s", self.d_s.shape(), (n, n)),
            ("L_s", self.l_s.shape(), (n, n)),
            ("D_b", self.d_b.shape(), (m, m)),
            ("s_s", (self.s_s.len(), 1), (n, 1)),
            ("s_b", (self.s_b.len(), 1), (m, 1)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::Dimension(format!("{name} is {got:?}, expected {want:?}")));
            }
        }
        Ok(())
    }
}

/// One Laplacian block per image, in image order.
pub fn laplacian_blocks(set: &InstanceSet, hp: &Hyperparams) -> Vec<LaplacianBlock> {
    set.images
        .iter()
        .enumerate()
        .map(|(i, image)| {
            let positions: Vec<[f64; 2]> = image
                .superpixels
                .iter()
                .map(|s| [s.position[0], s.position[1]])
                .collect();
            let colors: Vec<[f64; 3]> = image
                .superpixels
                .iter()
                .map(|s| [s.color[0], s.color[1], s.color[2]])
                .collect();
            let w = similarity_matrix(&positions, &colors, hp.lambda_p, hp.lambda_c, hp.similarity_threshold);
            normalized_laplacian(i, &w)
        })
        .collect()
}

pub fn superpixel_diffrac(set: &InstanceSet, beta: f64) -> Result<DiffracMatrix> {
    let x = DesignMatrix::from_rows(set.superpixels().map(|s| s.features.as_slice()))?;
    diffrac_matrix(&x, beta)
}

/// The box discriminative matrix. A single box overall has nothing to be
/// discriminated from, so its matrix is zero.
pub fn box_diffrac(set: &InstanceSet, beta: f64) -> Result<DMatrix<f64>> {
    if set.m_total() < 2 {
        return Ok(DMatrix::zeros(set.m_total(), set.m_total()));
    }
    let x = DesignMatrix::from_rows(set.boxes().map(|b| b.features.as_slice()))?;
    Ok(diffrac_matrix(&x, beta)?.matrix)
}

/// Build every matrix and cost vector of the objective.
pub fn build_matrices(set: &InstanceSet, hp: &Hyperparams) -> Result<ProblemMatrices> {
    let d_s = superpixel_diffrac(set, hp.beta_s)?.matrix;
    let l_s = assemble_block_laplacian(&laplacian_blocks(set, hp));
    let d_b = box_diffrac(set, hp.beta_b)?;
    let s_s = DVector::from_iterator(
        set.n_total(),
        set.superpixels().map(|s| saliency_to_cost(s.saliency, hp.saliency_eps)),
    );
    let s_b = DVector::from_iterator(
        set.m_total(),
        set.boxes().map(|b| saliency_to_cost(b.saliency, hp.saliency_eps)),
    );
    Ok(ProblemMatrices {
        d_s,
        l_s,
        d_b,
        s_s,
        s_b,
    })
}

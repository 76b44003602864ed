//! The joint method and the comparison baselines.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::assembly::{argmax_lowest, assemble, normalize_and_threshold, round, ImageLabeling, Labeling};
use crate::error::{Error, Result};
use crate::graph::assemble_block_laplacian;
use crate::harness::metrics::MetricsReport;
use crate::instance::{saliency_to_cost, Hyperparams, InstanceSet};
use crate::matrices::{box_diffrac, build_matrices, laplacian_blocks, superpixel_diffrac};
use crate::program::{LinearRow, QuadProgram};
use crate::solver::{solve, Solution, SolverConfig, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// Joint box and superpixel program.
    Joint,
    /// Discriminative clustering with smoothness, relaxed to a QP.
    B1,
    /// Most salient superpixels up to a pixel fraction.
    B2,
    /// B1 plus the superpixel saliency term.
    B3,
    /// Most salient box per image.
    Sal,
    /// Box discriminative term plus box saliency.
    SalDisc,
}

impl BaselineMode {
    pub const ALL: [BaselineMode; 6] = [
        BaselineMode::Joint,
        BaselineMode::B1,
        BaselineMode::B2,
        BaselineMode::B3,
        BaselineMode::Sal,
        BaselineMode::SalDisc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BaselineMode::Joint => "joint",
            BaselineMode::B1 => "b1",
            BaselineMode::B2 => "b2",
            BaselineMode::B3 => "b3",
            BaselineMode::Sal => "sal",
            BaselineMode::SalDisc => "sal-disc",
        }
    }
}

impl fmt::Display for BaselineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(BaselineMode::Joint),
            "b1" => Ok(BaselineMode::B1),
            "b2" => Ok(BaselineMode::B2),
            "b3" => Ok(BaselineMode::B3),
            "sal" => Ok(BaselineMode::Sal),
            "sal-disc" | "sal_disc" => Ok(BaselineMode::SalDisc),
            other => Err(Error::Argument(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub labeling: Labeling,
    pub metrics: MetricsReport,
    /// Relaxed solution, for the modes that solve a program.
    pub solution: Option<Solution>,
}

/// Run one method on an instance and score it against whatever ground
/// truth the instance carries.
pub fn run(mode: BaselineMode, set: &InstanceSet, hp: &Hyperparams, cfg: &SolverConfig) -> Result<RunOutput> {
    set.validate().into_result()?;
    hp.validate().into_result()?;
    // (labeling, relaxed solution, objective at the rounded point)
    let (labeling, solution, rounded) = match mode {
        BaselineMode::Joint => {
            let mats = build_matrices(set, hp)?;
            let qp = assemble(set, &mats, hp)?;
            let sol = checked_solve(&qp.program, cfg)?;
            let labeling = round(sol.u.as_slice(), set);
            let value = qp.program.objective(&labeling.to_vector(&qp.columns));
            (labeling, Some(sol), Some(value))
        }
        BaselineMode::B1 | BaselineMode::B3 => {
            let qp = segmentation_program(set, hp, mode == BaselineMode::B3)?;
            let sol = checked_solve(&qp, cfg)?;
            let labeling = segmentation_labeling(set, sol.u.as_slice());
            let y = flatten(&labeling, |im| {
                im.labels.iter().flatten().map(|&l| if l { 1.0 } else { 0.0 }).collect()
            });
            let value = qp.objective(&y);
            (labeling, Some(sol), Some(value))
        }
        BaselineMode::B2 => (saliency_fraction_labeling(set, hp), None, None),
        BaselineMode::Sal => (most_salient_box(set, hp), None, None),
        BaselineMode::SalDisc => {
            let qp = box_program(set, hp)?;
            let sol = checked_solve(&qp, cfg)?;
            let labeling = box_labeling(set, sol.u.as_slice());
            let z = flatten(&labeling, |im| {
                (0..im.relaxed_z.len())
                    .map(|b| if im.chosen_box == Some(b) { 1.0 } else { 0.0 })
                    .collect()
            });
            let value = qp.objective(&z);
            (labeling, Some(sol), Some(value))
        }
    };

    let mut metrics = MetricsReport::evaluate(&labeling, set);
    if let (Some(sol), Some(value)) = (&solution, rounded) {
        metrics.relaxed_objective = Some(sol.objective);
        metrics.objective = Some(value);
        metrics.gap = Some(value - sol.objective);
    }
    Ok(RunOutput {
        labeling,
        metrics,
        solution,
    })
}

fn flatten(labeling: &Labeling, per_image: impl Fn(&ImageLabeling) -> Vec<f64>) -> DVector<f64> {
    DVector::from_vec(labeling.images.iter().flat_map(per_image).collect())
}

fn checked_solve(qp: &QuadProgram, cfg: &SolverConfig) -> Result<Solution> {
    let sol = solve(qp, cfg)?;
    if sol.status == Status::Infeasible {
        return Err(Error::Infeasible("the relaxed program has no feasible point".into()));
    }
    Ok(sol)
}

/// `y^T (D_s + alpha L_s) y [+ nu y^T s_s]` with per-image foreground pixel
/// fraction bounds.
pub fn segmentation_program(set: &InstanceSet, hp: &Hyperparams, with_saliency: bool) -> Result<QuadProgram> {
    let d_s = superpixel_diffrac(set, hp.beta_s)?.matrix;
    let l_s = assemble_block_laplacian(&laplacian_blocks(set, hp));
    let quad = crate::linalg::symmetrized(&(d_s + l_s * hp.alpha));
    let n = set.n_total();
    let linear = if with_saliency {
        DVector::from_iterator(
            n,
            set.superpixels()
                .map(|s| hp.nu * saliency_to_cost(s.saliency, hp.saliency_eps)),
        )
    } else {
        DVector::zeros(n)
    };
    let mut qp = QuadProgram::unit_box(quad, linear);
    let (lo, hi) = hp.fg_bounds;
    let mut offset = 0;
    for image in &set.images {
        let total = image.total_pixels() as f64;
        let weights: Vec<(usize, f64)> = image
            .superpixels
            .iter()
            .enumerate()
            .map(|(j, s)| (offset + j, s.pixel_count as f64 / total))
            .collect();
        qp.ineq
            .push(LinearRow::new(weights.iter().map(|&(j, w)| (j, -w)).collect(), -lo));
        qp.ineq.push(LinearRow::new(weights, hi));
        offset += image.superpixels.len();
    }
    Ok(qp)
}

/// `z^T D_b z + mu z^T s_b` with one box per image.
pub fn box_program(set: &InstanceSet, hp: &Hyperparams) -> Result<QuadProgram> {
    let d_b = box_diffrac(set, hp.beta_b)?;
    let s_b = DVector::from_iterator(
        set.m_total(),
        set.boxes()
            .map(|b| hp.mu * saliency_to_cost(b.saliency, hp.saliency_eps)),
    );
    let mut qp = QuadProgram::unit_box(d_b, s_b);
    let mut offset = 0;
    for image in &set.images {
        let m = image.boxes.len();
        qp.eq
            .push(LinearRow::new((offset..offset + m).map(|k| (k, 1.0)).collect(), 1.0));
        offset += m;
    }
    Ok(qp)
}

fn segmentation_labeling(set: &InstanceSet, y: &[f64]) -> Labeling {
    let mut offset = 0;
    let images = set
        .images
        .iter()
        .map(|image| {
            let n = image.superpixels.len();
            let relaxed_y = y[offset..offset + n].to_vec();
            offset += n;
            ImageLabeling {
                chosen_box: None,
                labels: Some(normalize_and_threshold(&relaxed_y)),
                relaxed_y,
                relaxed_z: Vec::new(),
            }
        })
        .collect();
    Labeling { images }
}

fn box_labeling(set: &InstanceSet, z: &[f64]) -> Labeling {
    let mut offset = 0;
    let images = set
        .images
        .iter()
        .map(|image| {
            let m = image.boxes.len();
            let relaxed_z = z[offset..offset + m].to_vec();
            offset += m;
            ImageLabeling {
                chosen_box: argmax_lowest(&relaxed_z),
                labels: None,
                relaxed_y: Vec::new(),
                relaxed_z,
            }
        })
        .collect();
    Labeling { images }
}

/// Per image, take superpixels in increasing saliency cost until their
/// pixels reach the required fraction of the image.
///
/// For a linear objective over `{y : sum_j w_j y_j >= f}` with `y` in the
/// unit box, this greedy order reaches an optimal vertex (up to the single
/// fractional superpixel, which is rounded up).
pub fn saliency_fraction_labeling(set: &InstanceSet, hp: &Hyperparams) -> Labeling {
    let images = set
        .images
        .iter()
        .map(|image| {
            let costs: Vec<f64> = image
                .superpixels
                .iter()
                .map(|s| saliency_to_cost(s.saliency, hp.saliency_eps))
                .collect();
            let mut order: Vec<usize> = (0..costs.len()).collect();
            order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
            let required = hp.baseline_fraction * image.total_pixels() as f64;
            let mut labels = vec![false; costs.len()];
            let mut covered = 0.0;
            for j in order {
                if covered >= required - 1e-9 {
                    break;
                }
                labels[j] = true;
                covered += image.superpixels[j].pixel_count as f64;
            }
            ImageLabeling {
                chosen_box: None,
                relaxed_y: labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect(),
                labels: Some(labels),
                relaxed_z: Vec::new(),
            }
        })
        .collect();
    Labeling { images }
}

/// Per image, the box with the lowest saliency cost; ties to the lowest id.
pub fn most_salient_box(set: &InstanceSet, hp: &Hyperparams) -> Labeling {
    let images = set
        .images
        .iter()
        .map(|image| {
            let neg_costs: Vec<f64> = image
                .boxes
                .iter()
                .map(|b| -saliency_to_cost(b.saliency, hp.saliency_eps))
                .collect();
            ImageLabeling {
                chosen_box: argmax_lowest(&neg_costs),
                labels: None,
                relaxed_y: Vec::new(),
                relaxed_z: neg_costs.iter().map(|c| -c).collect(),
            }
        })
        .collect();
    Labeling { images }
}

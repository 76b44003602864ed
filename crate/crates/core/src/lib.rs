//! Joint colocalization and cosegmentation.
//!
//! Given a set of images that share a common object, each described by
//! superpixels and candidate boxes with precomputed features and saliency,
//! this crate selects one box per image and labels superpixels as
//! foreground by solving a single convex quadratic program. Box and
//! superpixel indicators are coupled through linear constraints, so
//! evidence at either scale informs the other.
//!
//! The pipeline is:
//!
//! 1. [`parse_instance`] reads and validates an [`InstanceSet`].
//! 2. [`build_matrices`] computes the discriminative matrices
//!    ([`diffrac`]), the block Laplacian ([`graph`]) and saliency costs.
//! 3. [`assemble`] builds the [`JointQp`].
//! 4. [`solve`] finds the relaxed optimum; [`round`] turns it into a
//!    [`Labeling`].
//!
//! [`brute_force`] solves tiny instances exactly, and [`harness`] holds the
//! baselines, metrics, and the planted-instance generator.

pub mod assembly;
pub mod diffrac;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod harness;
pub mod instance;
pub mod linalg;
pub mod matrices;
pub mod oracle;
pub mod program;
pub mod solver;

pub use assembly::{assemble, objective_value, projection_matrix, round, ColumnMap, ImageLabeling, JointQp, Labeling};
pub use diffrac::{centering_projection, diffrac_matrix, ridge_loss_min, DesignMatrix, DiffracMatrix};
pub use error::{Error, Result};
pub use graph::{assemble_block_laplacian, normalized_laplacian, similarity_matrix, LaplacianBlock};
pub use harness::{BaselineMode, MetricsReport, SynthConfig};
pub use instance::{
    parse_instance, saliency_to_cost, validate, BoundingBox, Hyperparams, ImageInstance, InstanceSet, Rect, Superpixel,
    ValidationReport,
};
pub use matrices::{build_matrices, ProblemMatrices};
pub use program::{LinearRow, QuadProgram};
pub use solver::{brute_force, relaxation_gap, solve, BruteForceResult, Solution, SolverConfig, Status};

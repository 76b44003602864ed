//! Assembly of the joint box/superpixel quadratic program and rounding of
//! its relaxed solution.
//!
//! Variables are concatenated as `u = [y; z]`: one column per superpixel of
//! every image (in image order) followed by one column per box. The
//! per-box copies `x_i = P_i y` are substituted away, so every constraint is
//! expressed directly in `y` and `z`:
//!
//! ```text
//! gamma |S_i| z_i <= sum_{j in S_i} y_j <= (1 - gamma) |S_i| z_i   per box
//! c_j y_j <= sum_{i : j in S_i} z_i                                per superpixel
//! sum_{i in image} z_i = 1                                         per image
//! ```
//!
//! where `c_j` counts the boxes containing superpixel `j`. Superpixels in no
//! box are fixed to zero through their upper bound.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::instance::{BoundingBox, Hyperparams, InstanceSet};
use crate::linalg::block_diagonal;
use crate::matrices::ProblemMatrices;
use crate::program::{LinearRow, QuadProgram};

/// Below this, a per-image maximum of relaxed `y` is treated as zero.
pub const ROUNDING_ZERO: f64 = 1e-9;

/// Selector of the superpixels in one box: row `r` picks the `r`-th member
/// in ascending id order.
pub fn projection_matrix(bbox: &BoundingBox, n: usize) -> DMatrix<f64> {
    let members = bbox.sorted_members();
    let mut p = DMatrix::zeros(members.len(), n);
    for (r, &j) in members.iter().enumerate() {
        p[(r, j)] = 1.0;
    }
    p
}

/// Mapping between `(image, local id)` pairs and global columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMap {
    y_offsets: Vec<usize>,
    z_offsets: Vec<usize>,
    n_total: usize,
    m_total: usize,
}

impl ColumnMap {
    pub fn new(set: &InstanceSet) -> Self {
        let n_total = set.n_total();
        let mut y_offsets = Vec::with_capacity(set.images.len());
        let mut z_offsets = Vec::with_capacity(set.images.len());
        let (mut ny, mut nz) = (0, n_total);
        for image in &set.images {
            y_offsets.push(ny);
            z_offsets.push(nz);
            ny += image.superpixels.len();
            nz += image.boxes.len();
        }
        ColumnMap {
            y_offsets,
            z_offsets,
            n_total,
            m_total: nz - n_total,
        }
    }

    pub fn y(&self, image: usize, superpixel: usize) -> usize {
        self.y_offsets[image] + superpixel
    }

    pub fn z(&self, image: usize, bbox: usize) -> usize {
        self.z_offsets[image] + bbox
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn m_total(&self) -> usize {
        self.m_total
    }

    pub fn dim(&self) -> usize {
        self.n_total + self.m_total
    }

    pub fn images(&self) -> usize {
        self.y_offsets.len()
    }

    /// Inverse lookup: which variable a column holds.
    pub fn variable(&self, col: usize) -> Variable {
        let offsets = if col < self.n_total {
            &self.y_offsets
        } else {
            &self.z_offsets
        };
        let image = offsets.partition_point(|&o| o <= col) - 1;
        if col < self.n_total {
            Variable::Superpixel {
                image,
                index: col - offsets[image],
            }
        } else {
            Variable::Box {
                image,
                index: col - offsets[image],
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Superpixel { image: usize, index: usize },
    Box { image: usize, index: usize },
}

impl std::fmt::Display for Variable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variable::Superpixel { image, index } => write!(f, "y[{image},{index}]"),
            Variable::Box { image, index } => write!(f, "z[{image},{index}]"),
        }
    }
}

/// What an assembled row encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `gamma |S_i| z_i <= sum y_j`
    BoxLower { image: usize, bbox: usize },
    /// `sum y_j <= (1 - gamma) |S_i| z_i`
    BoxUpper { image: usize, bbox: usize },
    /// `c_j y_j <= sum z_i`
    Superpixel { image: usize, superpixel: usize },
    /// `sum z_i = 1`
    OneBox { image: usize },
}

#[derive(Debug, Clone)]
pub struct JointQp {
    pub program: QuadProgram,
    pub columns: ColumnMap,
    /// Kind of each inequality row, parallel to `program.ineq`.
    pub ineq_kinds: Vec<RowKind>,
    /// Kind of each equality row, parallel to `program.eq`.
    pub eq_kinds: Vec<RowKind>,
    /// Columns of superpixels that lie in no box; fixed to zero.
    pub orphans: Vec<usize>,
}

impl JointQp {
    pub fn dim(&self) -> usize {
        self.program.dim()
    }

    /// Text dump of the constraint system, one relation per line.
    pub fn dump_constraints(&self) -> String {
        let mut out = String::new();
        for row in &self.program.ineq {
            writeln!(out, "{} <= {}", self.format_terms(&row.terms), format_coeff(row.rhs)).unwrap();
        }
        for row in &self.program.eq {
            writeln!(out, "{} = {}", self.format_terms(&row.terms), format_coeff(row.rhs)).unwrap();
        }
        for &col in &self.orphans {
            writeln!(out, "1*{} = 0", self.columns.variable(col)).unwrap();
        }
        out
    }

    fn format_terms(&self, terms: &[(usize, f64)]) -> String {
        let mut s = String::new();
        for (k, &(col, a)) in terms.iter().enumerate() {
            let var = self.columns.variable(col);
            match (k, a < 0.0) {
                (0, false) => write!(s, "{}*{var}", format_coeff(a)),
                (0, true) => write!(s, "-{}*{var}", format_coeff(-a)),
                (_, false) => write!(s, " + {}*{var}", format_coeff(a)),
                (_, true) => write!(s, " - {}*{var}", format_coeff(-a)),
            }
            .unwrap();
        }
        s
    }

    /// Relaxed `y` values of one image.
    pub fn image_y<'a>(&self, u: &'a [f64], image: usize, n_i: usize) -> &'a [f64] {
        let start = self.columns.y(image, 0);
        &u[start..start + n_i]
    }
}

/// Format a coefficient with at most 12 decimals and no trailing zeros.
pub fn format_coeff(v: f64) -> String {
    let s = format!("{:.12}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Build the joint program from an instance and its objective matrices.
pub fn assemble(set: &InstanceSet, mats: &ProblemMatrices, hp: &Hyperparams) -> Result<JointQp> {
    mats.check_against(set)?;
    if !(0.0..0.5).contains(&hp.gamma) {
        return Err(Error::Argument(format!(
            "gamma must lie in [0, 0.5) for the box rows to be satisfiable, got {}",
            hp.gamma
        )));
    }
    let columns = ColumnMap::new(set);
    let n = columns.n_total();

    let seg = &mats.d_s + &mats.l_s * hp.alpha;
    let quad = block_diagonal([&crate::linalg::symmetrized(&seg), &mats.d_b]);
    let mut linear = DVector::zeros(columns.dim());
    linear.rows_mut(0, n).copy_from(&(&mats.s_s * hp.nu));
    linear.rows_mut(n, columns.m_total()).copy_from(&(&mats.s_b * hp.mu));

    let mut program = QuadProgram::unit_box(quad, linear);
    let mut ineq_kinds = Vec::new();
    let mut eq_kinds = Vec::new();
    let mut orphans = Vec::new();

    for (i, image) in set.images.iter().enumerate() {
        for (b, bbox) in image.boxes.iter().enumerate() {
            let members = bbox.sorted_members();
            let size = members.len() as f64;
            let zc = columns.z(i, b);

            let mut lower = vec![(zc, hp.gamma * size)];
            lower.extend(members.iter().map(|&j| (columns.y(i, j), -1.0)));
            program.ineq.push(LinearRow::new(lower, 0.0));
            ineq_kinds.push(RowKind::BoxLower { image: i, bbox: b });

            let mut upper: Vec<(usize, f64)> = members.iter().map(|&j| (columns.y(i, j), 1.0)).collect();
            upper.push((zc, -(1.0 - hp.gamma) * size));
            program.ineq.push(LinearRow::new(upper, 0.0));
            ineq_kinds.push(RowKind::BoxUpper { image: i, bbox: b });
        }

        for (j, &count) in image.containment_counts().iter().enumerate() {
            let yc = columns.y(i, j);
            if count == 0 {
                program.upper[yc] = 0.0;
                orphans.push(yc);
                continue;
            }
            let mut terms = vec![(yc, count as f64)];
            terms.extend(
                image
                    .boxes
                    .iter()
                    .enumerate()
                    .filter(|(_, bx)| bx.members.contains(&j))
                    .map(|(b, _)| (columns.z(i, b), -1.0)),
            );
            program.ineq.push(LinearRow::new(terms, 0.0));
            ineq_kinds.push(RowKind::Superpixel {
                image: i,
                superpixel: j,
            });
        }

        let terms = (0..image.boxes.len()).map(|b| (columns.z(i, b), 1.0)).collect();
        program.eq.push(LinearRow::new(terms, 1.0));
        eq_kinds.push(RowKind::OneBox { image: i });
    }

    Ok(JointQp {
        program,
        columns,
        ineq_kinds,
        eq_kinds,
        orphans,
    })
}

/// `u^T M u + c^T u`.
pub fn objective_value(qp: &JointQp, u: &DVector<f64>) -> Result<f64> {
    if u.len() != qp.dim() {
        return Err(Error::Dimension(format!(
            "vector of length {} for a program with {} variables",
            u.len(),
            qp.dim()
        )));
    }
    Ok(qp.program.objective(u))
}

/// Rounded labels of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageLabeling {
    /// Selected box, absent for segmentation-only methods.
    pub chosen_box: Option<usize>,
    /// Foreground flag per superpixel, absent for box-only methods.
    pub labels: Option<Vec<bool>>,
    pub relaxed_y: Vec<f64>,
    pub relaxed_z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub images: Vec<ImageLabeling>,
}

impl Labeling {
    /// Stack labels and one-hot box choices into a `[y; z]` vector.
    /// Missing parts are left at zero.
    pub fn to_vector(&self, columns: &ColumnMap) -> DVector<f64> {
        let mut u = DVector::zeros(columns.dim());
        for (i, im) in self.images.iter().enumerate() {
            if let Some(labels) = &im.labels {
                for (j, &fg) in labels.iter().enumerate() {
                    if fg {
                        u[columns.y(i, j)] = 1.0;
                    }
                }
            }
            if let Some(b) = im.chosen_box {
                u[columns.z(i, b)] = 1.0;
            }
        }
        u
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &v) in values.iter().enumerate() {
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((k, v)),
        }
    }
    best.map(|(k, _)| k)
}

/// Divide by the largest value and threshold at 0.5 (inclusive). An
/// all-zero vector stays all background.
pub fn normalize_and_threshold(y: &[f64]) -> Vec<bool> {
    let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_nan() || max <= ROUNDING_ZERO {
        return vec![false; y.len()];
    }
    y.iter().map(|&v| v / max >= 0.5).collect()
}

/// Round a relaxed solution of the joint program.
pub fn round(u: &[f64], set: &InstanceSet) -> Labeling {
    let columns = ColumnMap::new(set);
    let images = set
        .images
        .iter()
        .enumerate()
        .map(|(i, image)| {
            let n_i = image.superpixels.len();
            let m_i = image.boxes.len();
            let y = u[columns.y(i, 0)..columns.y(i, 0) + n_i].to_vec();
            let z = u[columns.z(i, 0)..columns.z(i, 0) + m_i].to_vec();
            let mut labels = normalize_and_threshold(&y);
            for (label, count) in labels.iter_mut().zip(image.containment_counts()) {
                if count == 0 {
                    *label = false;
                }
            }
            ImageLabeling {
                chosen_box: argmax_lowest(&z),
                labels: Some(labels),
                relaxed_y: y,
                relaxed_z: z,
            }
        })
        .collect();
    Labeling { images }
}

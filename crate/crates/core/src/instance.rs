//! Problem instances: images, superpixels, box proposals, and the
//! hyperparameters of the joint objective.
//!
//! Instances are read from and written to a versioned JSON document. All
//! invariants are checked on parse, so an [`InstanceSet`] obtained through
//! [`parse_instance`] is always valid.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current version of the instance and labeling file formats.
pub const FORMAT_VERSION: u32 = 1;

/// Axis-aligned rectangle `[x, y, w, h]` in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }
}

impl From<[f64; 4]> for Rect {
    fn from(v: [f64; 4]) -> Self {
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x, r.y, r.w, r.h]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Superpixel {
    pub id: usize,
    pub features: Vec<f64>,
    /// Centroid in normalized image coordinates, `[0,1]^2`.
    pub position: Vec<f64>,
    /// Mean color, each channel in `[0,1]`.
    pub color: Vec<f64>,
    /// Mean saliency map value over the superpixel's pixels.
    pub saliency: f64,
    pub pixel_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_foreground: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub id: usize,
    /// Ids of the superpixels covered by the box (the set `S_i`).
    pub members: Vec<usize>,
    pub rect: Rect,
    pub features: Vec<f64>,
    /// Mean saliency map value over the box's pixels.
    pub saliency: f64,
}

impl BoundingBox {
    /// Members in ascending order with duplicates removed.
    pub fn sorted_members(&self) -> Vec<usize> {
        self.members
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageInstance {
    pub width: u32,
    pub height: u32,
    pub superpixels: Vec<Superpixel>,
    pub boxes: Vec<BoundingBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_box: Option<Rect>,
}

impl ImageInstance {
    /// For every superpixel, the number of boxes that contain it.
    pub fn containment_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.superpixels.len()];
        for b in &self.boxes {
            for j in b.sorted_members() {
                if j < counts.len() {
                    counts[j] += 1;
                }
            }
        }
        counts
    }

    pub fn total_pixels(&self) -> u64 {
        self.superpixels.iter().map(|s| s.pixel_count).sum()
    }

    pub fn has_gt_labels(&self) -> bool {
        self.superpixels.iter().all(|s| s.gt_foreground.is_some())
    }
}

/// A full problem: every image that shares the common object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSet {
    pub version: u32,
    pub images: Vec<ImageInstance>,
}

impl InstanceSet {
    pub fn new(images: Vec<ImageInstance>) -> Self {
        InstanceSet {
            version: FORMAT_VERSION,
            images,
        }
    }

    /// Total number of superpixels over all images.
    pub fn n_total(&self) -> usize {
        self.images.iter().map(|im| im.superpixels.len()).sum()
    }

    /// Total number of boxes over all images.
    pub fn m_total(&self) -> usize {
        self.images.iter().map(|im| im.boxes.len()).sum()
    }

    pub fn superpixels(&self) -> impl Iterator<Item = &Superpixel> {
        self.images.iter().flat_map(|im| im.superpixels.iter())
    }

    pub fn boxes(&self) -> impl Iterator<Item = &BoundingBox> {
        self.images.iter().flat_map(|im| im.boxes.iter())
    }

    /// Serialize to the instance file format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// Hyperparameters of the joint objective and of the baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    /// Weight of the Laplacian smoothness term.
    pub alpha: f64,
    /// Weight of the superpixel saliency term.
    pub nu: f64,
    /// Weight of the box saliency term.
    pub mu: f64,
    /// Minimum fraction of a selected box's superpixels that are foreground.
    pub gamma: f64,
    /// Ridge parameter for the superpixel discriminative matrix.
    pub beta_s: f64,
    /// Ridge parameter for the box discriminative matrix.
    pub beta_b: f64,
    pub lambda_p: f64,
    pub lambda_c: f64,
    /// Lower clamp applied to saliency values before taking the log.
    pub saliency_eps: f64,
    /// Minimum foreground pixel fraction for the saliency-only baseline.
    pub baseline_fraction: f64,
    /// Foreground pixel fraction bounds `(lo, hi)` for the segmentation-only
    /// quadratic baselines.
    pub fg_bounds: (f64, f64),
    /// Similarities below this value are zeroed. `0` keeps the kernel dense.
    pub similarity_threshold: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 0.1,
            nu: 0.005,
            mu: 0.001,
            gamma: 0.1,
            beta_s: 1.0,
            beta_b: 1.0,
            lambda_p: 0.001,
            lambda_c: 0.05,
            saliency_eps: 1e-6,
            baseline_fraction: 0.4,
            fg_bounds: (0.1, 0.9),
            similarity_threshold: 0.0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if !(0.0..=1.0).contains(&self.gamma) {
            report.push(None, format!("gamma outside [0,1]: {}", self.gamma));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("nu", self.nu),
            ("mu", self.mu),
            ("lambda_p", self.lambda_p),
            ("lambda_c", self.lambda_c),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                report.push(None, format!("{name} must be finite and non-negative: {v}"));
            }
        }
        for (name, v) in [("beta_s", self.beta_s), ("beta_b", self.beta_b)] {
            if !(v.is_finite() && v > 0.0) {
                report.push(None, format!("{name} must be positive: {v}"));
            }
        }
        if !(self.saliency_eps > 0.0 && self.saliency_eps < 1.0) {
            report.push(None, format!("saliency_eps must lie in (0,1): {}", self.saliency_eps));
        }
        if !(0.0..=1.0).contains(&self.baseline_fraction) {
            report.push(
                None,
                format!("baseline_fraction outside [0,1]: {}", self.baseline_fraction),
            );
        }
        let (lo, hi) = self.fg_bounds;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            report.push(None, format!("fg_bounds must satisfy 0 <= lo < hi <= 1: ({lo}, {hi})"));
        }
        if !(self.similarity_threshold >= 0.0 && self.similarity_threshold < 1.0) {
            report.push(
                None,
                format!("similarity_threshold must lie in [0,1): {}", self.similarity_threshold),
            );
        }
        report
    }
}

/// Saliency cost `-log(max(m, eps))`. Lower cost means more salient.
pub fn saliency_to_cost(m: f64, eps: f64) -> f64 {
    let clamped = m.clamp(eps, 1.0);
    // -ln(1) is -0.0
    (-clamped.ln()).max(0.0)
}

/// Where in the instance a violation was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Image(usize),
    Superpixel { image: usize, superpixel: usize },
    Box { image: usize, bbox: usize },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Location::Image(i) => write!(f, "image {i}"),
            Location::Superpixel { image, superpixel } => {
                write!(f, "image {image}, superpixel {superpixel}")
            }
            Location::Box { image, bbox } => write!(f, "image {image}, box {bbox}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub location: Option<Location>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{loc}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every invariant violation found in an instance or hyperparameter set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn push(&mut self, location: Option<Location>, message: impl Into<String>) {
        self.violations.push(Violation {
            location,
            message: message.into(),
        });
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(self.violations))
        }
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Check every instance invariant and report all violations.
pub fn validate(set: &InstanceSet) -> ValidationReport {
    let mut report = ValidationReport::default();
    if set.version != FORMAT_VERSION {
        report.push(None, format!("unsupported version {}", set.version));
    }
    if set.images.is_empty() {
        report.push(None, "no images");
        return report;
    }

    let sp_dim = set.superpixels().next().map(|s| s.features.len());
    let box_dim = set.boxes().next().map(|b| b.features.len());

    for (i, image) in set.images.iter().enumerate() {
        if image.width == 0 || image.height == 0 {
            report.push(Some(Location::Image(i)), "image dimensions must be positive");
        }
        if image.superpixels.is_empty() {
            report.push(Some(Location::Image(i)), "image has no superpixels");
        }
        if image.boxes.is_empty() {
            report.push(Some(Location::Image(i)), "image has no boxes");
        }
        let n = image.superpixels.len();
        for (j, sp) in image.superpixels.iter().enumerate() {
            let loc = Some(Location::Superpixel {
                image: i,
                superpixel: j,
            });
            if sp.id != j {
                report.push(loc, format!("id {} is not contiguous (expected {j})", sp.id));
            }
            if Some(sp.features.len()) != sp_dim {
                report.push(
                    loc,
                    format!(
                        "feature dimension {} differs from {}",
                        sp.features.len(),
                        sp_dim.unwrap_or(0)
                    ),
                );
            }
            if !all_finite(&sp.features) {
                report.push(loc, "features must be finite");
            }
            if sp.position.len() != 2 {
                report.push(loc, "position must be 2-dim");
            } else if !sp.position.iter().all(|p| (0.0..=1.0).contains(p)) {
                report.push(loc, "position must lie in [0,1]");
            }
            if sp.color.len() != 3 {
                report.push(loc, "color must be 3-dim");
            } else if !sp.color.iter().all(|c| (0.0..=1.0).contains(c)) {
                report.push(loc, "color must lie in [0,1]");
            }
            if !(0.0..=1.0).contains(&sp.saliency) {
                report.push(loc, format!("saliency outside [0,1]: {}", sp.saliency));
            }
            if sp.pixel_count == 0 {
                report.push(loc, "pixel_count must be at least 1");
            }
        }
        for (b, bx) in image.boxes.iter().enumerate() {
            let loc = Some(Location::Box { image: i, bbox: b });
            if bx.id != b {
                report.push(loc, format!("id {} is not contiguous (expected {b})", bx.id));
            }
            if bx.members.is_empty() {
                report.push(loc, "box has no member superpixels");
            }
            if let Some(&bad) = bx.members.iter().find(|&&j| j >= n) {
                report.push(loc, format!("member superpixel {bad} out of range (image has {n})"));
            }
            if bx.sorted_members().len() != bx.members.len() {
                report.push(loc, "duplicate member superpixel");
            }
            if Some(bx.features.len()) != box_dim {
                report.push(
                    loc,
                    format!(
                        "feature dimension {} differs from {}",
                        bx.features.len(),
                        box_dim.unwrap_or(0)
                    ),
                );
            }
            if !all_finite(&bx.features) {
                report.push(loc, "features must be finite");
            }
            if !(0.0..=1.0).contains(&bx.saliency) {
                report.push(loc, format!("saliency outside [0,1]: {}", bx.saliency));
            }
            if !(bx.rect.w >= 0.0 && bx.rect.h >= 0.0) {
                report.push(loc, "rect must have non-negative width and height");
            }
        }
        if let Some(gt) = image.gt_box {
            if !(gt.w >= 0.0 && gt.h >= 0.0) {
                report.push(Some(Location::Image(i)), "gt_box must have non-negative size");
            }
        }
    }
    if set.n_total() < 2 {
        report.push(None, "at least 2 superpixels are required in total");
    }
    report
}

/// Parse and validate an instance file.
pub fn parse_instance(bytes: &[u8]) -> Result<InstanceSet> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let set: InstanceSet = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    validate(&set).into_result()?;
    Ok(set)
}

//! Localization and segmentation metrics.

use serde::{Deserialize, Serialize};

use crate::assembly::Labeling;
use crate::error::{Error, Result};
use crate::instance::{InstanceSet, Rect};

/// Intersection over union of two rectangles.
pub fn box_iou(a: &Rect, b: &Rect) -> f64 {
    let ix = (a.x + a.w).min(b.x + b.w) - a.x.max(b.x);
    let iy = (a.y + a.h).min(b.y + b.h) - a.y.max(b.y);
    let inter = ix.max(0.0) * iy.max(0.0);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Fraction of pairs with IoU strictly above 0.5. Empty input gives 0.
pub fn corloc(preds: &[Rect], gts: &[Rect]) -> f64 {
    assert_eq!(preds.len(), gts.len(), "one ground-truth box per prediction");
    if preds.is_empty() {
        return 0.0;
    }
    let hits = preds.iter().zip(gts).filter(|(p, g)| box_iou(p, g) > 0.5).count();
    hits as f64 / preds.len() as f64
}

/// Pixel accuracy and foreground Jaccard index, micro-averaged over all
/// labeled superpixels of all images (weighted by pixel count).
pub fn pixel_metrics(pred: &Labeling, set: &InstanceSet) -> Result<(f64, f64)> {
    let mut correct = 0u64;
    let mut total = 0u64;
    let mut inter = 0u64;
    let mut union = 0u64;
    let mut any = false;
    for (i, (image, labeling)) in set.images.iter().zip(&pred.images).enumerate() {
        let labels = labeling
            .labels
            .as_ref()
            .ok_or_else(|| Error::Missing(format!("image {i} has no superpixel labels")))?;
        if labels.len() != image.superpixels.len() {
            return Err(Error::Dimension(format!(
                "image {i}: {} labels for {} superpixels",
                labels.len(),
                image.superpixels.len()
            )));
        }
        for (sp, &fg) in image.superpixels.iter().zip(labels) {
            let gt = sp
                .gt_foreground
                .ok_or_else(|| Error::Missing(format!("image {i} lacks ground-truth labels")))?;
            any = true;
            total += sp.pixel_count;
            if fg == gt {
                correct += sp.pixel_count;
            }
            if fg && gt {
                inter += sp.pixel_count;
            }
            if fg || gt {
                union += sp.pixel_count;
            }
        }
    }
    if !any {
        return Err(Error::Missing("no labeled superpixels".into()));
    }
    let ap = correct as f64 / total as f64;
    // both prediction and ground truth empty: perfect agreement
    let jaccard = if union == 0 { 1.0 } else { inter as f64 / union as f64 };
    Ok((ap, jaccard))
}

/// Dataset-level summary of a run. Fields that do not apply to the method,
/// or lack ground truth, are absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub pixel_ap: Option<f64>,
    pub jaccard_iou: Option<f64>,
    pub corloc: Option<f64>,
    pub mean_box_iou: Option<f64>,
    /// Objective at the rounded labeling.
    pub objective: Option<f64>,
    /// Objective at the relaxed optimum.
    pub relaxed_objective: Option<f64>,
    /// `objective - relaxed_objective`.
    pub gap: Option<f64>,
}

impl MetricsReport {
    /// Ground-truth metrics of a labeling; objective fields are left empty.
    pub fn evaluate(pred: &Labeling, set: &InstanceSet) -> Self {
        let mut report = MetricsReport::default();
        if let Ok((ap, jac)) = pixel_metrics(pred, set) {
            report.pixel_ap = Some(ap);
            report.jaccard_iou = Some(jac);
        }
        let (preds, gts): (Vec<Rect>, Vec<Rect>) = set
            .images
            .iter()
            .zip(&pred.images)
            .filter_map(|(im, l)| Some((im.boxes.get(l.chosen_box?)?.rect, im.gt_box?)))
            .unzip();
        if !preds.is_empty() {
            report.corloc = Some(corloc(&preds, &gts));
            let total: f64 = preds.iter().zip(&gts).map(|(p, g)| box_iou(p, g)).sum();
            report.mean_box_iou = Some(total / preds.len() as f64);
        }
        report
    }
}

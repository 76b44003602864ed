//! Labeling files: the versioned JSON written by `solve` and `oracle` and
//! read back by `eval`.

use serde::{Deserialize, Serialize};

use crate::assembly::{ImageLabeling, Labeling};
use crate::error::{Error, Result};
use crate::harness::metrics::MetricsReport;
use crate::instance::FORMAT_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_box: Option<usize>,
    /// 0/1 per superpixel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u8>>,
    #[serde(default)]
    pub relaxed_y: Vec<f64>,
    #[serde(default)]
    pub relaxed_z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelingFile {
    pub version: u32,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub metrics: MetricsReport,
    pub images: Vec<ImageRecord>,
}

impl LabelingFile {
    pub fn new(mode: &str, labeling: &Labeling, metrics: MetricsReport) -> Self {
        let images = labeling
            .images
            .iter()
            .map(|im| ImageRecord {
                chosen_box: im.chosen_box,
                labels: im.labels.as_ref().map(|l| l.iter().map(|&v| u8::from(v)).collect()),
                relaxed_y: im.relaxed_y.clone(),
                relaxed_z: im.relaxed_z.clone(),
            })
            .collect();
        LabelingFile {
            version: FORMAT_VERSION,
            mode: mode.to_string(),
            status: None,
            iterations: None,
            metrics,
            images,
        }
    }

    pub fn labeling(&self) -> Labeling {
        Labeling {
            images: self
                .images
                .iter()
                .map(|r| ImageLabeling {
                    chosen_box: r.chosen_box,
                    labels: r.labels.as_ref().map(|l| l.iter().map(|&v| v != 0).collect()),
                    relaxed_y: r.relaxed_y.clone(),
                    relaxed_z: r.relaxed_z.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("labeling serialization is infallible")
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let file: LabelingFile = serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
        if file.version != FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported version {}", file.version)));
        }
        if let Some((i, bad)) = file
            .images
            .iter()
            .enumerate()
            .find_map(|(i, r)| r.labels.as_ref()?.iter().find(|&&v| v > 1).map(|v| (i, *v)))
        {
            return Err(Error::Parse(format!("image {i}: label {bad} is not 0 or 1")));
        }
        Ok(file)
    }
}

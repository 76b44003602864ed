//! Baselines, metrics, synthetic instances and output files.

pub mod baselines;
pub mod metrics;
pub mod output;
pub mod synth;

pub use baselines::{run, BaselineMode, RunOutput};
pub use metrics::{box_iou, corloc, pixel_metrics, MetricsReport};
pub use output::LabelingFile;
pub use synth::{generate, SynthConfig};

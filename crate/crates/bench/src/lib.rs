//! Shared inputs for the benchmarks.

use cosegloc_core::{harness::generate, InstanceSet, SynthConfig};

/// A planted instance with `images` images of `superpixels` superpixels and
/// `boxes` boxes each.
pub fn planted(images: usize, superpixels: usize, boxes: usize) -> InstanceSet {
    generate(&SynthConfig {
        images,
        superpixels_per_image: superpixels,
        boxes_per_image: boxes,
        feature_dim: 16,
        ..SynthConfig::default()
    })
    .expect("valid synthetic config")
}

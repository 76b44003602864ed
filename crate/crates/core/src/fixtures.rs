//! Small hand-built instances shared by tests, benches and examples.

use crate::instance::{BoundingBox, ImageInstance, InstanceSet, Rect, Superpixel};

/// The five-superpixel, two-box toy image: box 0 covers superpixels
/// {0, 2, 3} and box 1 covers {0, 1, 3}; superpixel 4 lies in no box.
pub fn toy_instance() -> InstanceSet {
    let features = [[0.9, 0.1], [0.2, 0.8], [0.7, 0.3], [0.8, 0.4], [0.1, 0.1]];
    let positions = [[0.3, 0.4], [0.6, 0.5], [0.2, 0.6], [0.4, 0.5], [0.9, 0.9]];
    let superpixels = (0..5)
        .map(|j| Superpixel {
            id: j,
            features: features[j].to_vec(),
            position: positions[j].to_vec(),
            color: vec![0.2 * j as f64, 0.5, 1.0 - 0.2 * j as f64],
            saliency: [0.9, 0.3, 0.8, 0.7, 0.05][j],
            pixel_count: 100,
            gt_foreground: Some([true, false, true, true, false][j]),
        })
        .collect();
    let boxes = vec![
        BoundingBox {
            id: 0,
            members: vec![0, 2, 3],
            rect: Rect::new(10.0, 30.0, 40.0, 40.0),
            features: vec![0.8, 0.2, 0.5],
            saliency: 0.8,
        },
        BoundingBox {
            id: 1,
            members: vec![0, 1, 3],
            rect: Rect::new(20.0, 30.0, 50.0, 30.0),
            features: vec![0.5, 0.5, 0.1],
            saliency: 0.6,
        },
    ];
    InstanceSet::new(vec![ImageInstance {
        width: 100,
        height: 100,
        superpixels,
        boxes,
        gt_box: Some(Rect::new(10.0, 30.0, 40.0, 40.0)),
    }])
}

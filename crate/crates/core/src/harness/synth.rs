//! Planted synthetic instances with known foreground.
//!
//! Superpixels tile each image as a grid. Every image contains a planted
//! object: a region of cells whose features are drawn around a shared
//! foreground centroid, whose colors are close to a shared object color,
//! and whose saliency is high. One box covers the planted region plus a few
//! background cells that enlarge its rectangle least; the remaining boxes
//! are random member sets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{BoundingBox, ImageInstance, InstanceSet, Rect, Superpixel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub images: usize,
    pub superpixels_per_image: usize,
    pub boxes_per_image: usize,
    pub feature_dim: usize,
    /// Distance between the foreground and background feature means, in
    /// units of the per-coordinate standard deviation.
    pub separation: f64,
    /// In `[0,1]`: probability that a superpixel's saliency follows its
    /// planted label; otherwise it is uniform clutter.
    pub saliency_correlation: f64,
    /// In `[0,1]`: how tightly planted superpixels cluster in space.
    pub spatial_tightness: f64,
    /// Fraction of each image's superpixels that are planted foreground.
    pub fg_fraction: f64,
    /// Background superpixels added to the true box.
    pub dilation: usize,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            images: 3,
            superpixels_per_image: 8,
            boxes_per_image: 3,
            feature_dim: 4,
            separation: 5.0,
            saliency_correlation: 0.9,
            spatial_tightness: 0.8,
            fg_fraction: 0.4,
            dilation: 1,
            width: 320,
            height: 240,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("images", self.images),
            ("superpixels_per_image", self.superpixels_per_image),
            ("boxes_per_image", self.boxes_per_image),
            ("feature_dim", self.feature_dim),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Argument(format!("{name} must be at least 1")));
            }
        }
        if self.images * self.superpixels_per_image < 2 {
            return Err(Error::Argument("need at least 2 superpixels in total".into()));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::Argument("separation must be non-negative".into()));
        }
        for (name, v) in [
            ("saliency_correlation", self.saliency_correlation),
            ("spatial_tightness", self.spatial_tightness),
            ("fg_fraction", self.fg_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Argument(format!("{name} must lie in [0,1]")));
            }
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Argument("image size must be positive".into()));
        }
        Ok(())
    }
}

const FG_SALIENCY: f64 = 0.9;
const BG_SALIENCY: f64 = 0.1;
const SALIENCY_SPREAD: f64 = 0.2;
const BOX_FEATURE_NOISE: f64 = 0.1;

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

/// Superpixels tile the image as a grid of equal cells in row-major order.
struct Grid {
    cols: usize,
    cell_w: f64,
    cell_h: f64,
}

impl Grid {
    fn new(n: usize, width: u32, height: u32) -> Self {
        let aspect = width as f64 / height as f64;
        let cols = ((n as f64 * aspect).sqrt().ceil() as usize).clamp(1, n);
        let rows = n.div_ceil(cols);
        Grid {
            cols,
            cell_w: width as f64 / cols as f64,
            cell_h: height as f64 / rows as f64,
        }
    }

    fn cell(&self, j: usize) -> (usize, usize) {
        (j % self.cols, j / self.cols)
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        let (ca, ra) = self.cell(a);
        let (cb, rb) = self.cell(b);
        ca.abs_diff(cb) + ra.abs_diff(rb) == 1
    }

    /// Bounding rectangle of a set of cells.
    fn rect(&self, members: &[usize]) -> Rect {
        let (mut c0, mut r0, mut c1, mut r1) = (usize::MAX, usize::MAX, 0, 0);
        for &j in members {
            let (c, r) = self.cell(j);
            c0 = c0.min(c);
            r0 = r0.min(r);
            c1 = c1.max(c + 1);
            r1 = r1.max(r + 1);
        }
        Rect::new(
            c0 as f64 * self.cell_w,
            r0 as f64 * self.cell_h,
            (c1 - c0) as f64 * self.cell_w,
            (r1 - r0) as f64 * self.cell_h,
        )
    }
}

/// Grow a region of `k` cells from a random seed. With probability
/// `tightness` each new cell is adjacent to the region.
fn grow_region(grid: &Grid, n: usize, k: usize, tightness: f64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut inside = vec![false; n];
    inside[rng.random_range(0..n)] = true;
    for _ in 1..k {
        let outside: Vec<usize> = (0..n).filter(|&j| !inside[j]).collect();
        let frontier: Vec<usize> = outside
            .iter()
            .copied()
            .filter(|&j| (0..n).any(|i| inside[i] && grid.adjacent(i, j)))
            .collect();
        let pool = if !frontier.is_empty() && unit(rng) < tightness {
            frontier
        } else {
            outside
        };
        inside[pool[rng.random_range(0..pool.len())]] = true;
    }
    inside
}

/// Generate a planted instance with ground truth. Deterministic in the seed.
pub fn generate(cfg: &SynthConfig) -> Result<InstanceSet> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = cfg.feature_dim;

    // foreground feature mean at distance `separation` from the origin
    let mut direction: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    direction.iter_mut().for_each(|v| *v *= cfg.separation / norm);
    let fg_color = [unit(&mut rng), unit(&mut rng), unit(&mut rng)];
    let color_noise = Normal::new(0.0, 0.05).expect("positive spread");
    let box_noise = Normal::new(0.0, BOX_FEATURE_NOISE).expect("positive spread");

    let n = cfg.superpixels_per_image;
    let m = cfg.boxes_per_image;
    let k = ((cfg.fg_fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let grid = Grid::new(n, cfg.width, cfg.height);
    let cell_pixels = (grid.cell_w * grid.cell_h).round().max(1.0) as u64;

    let mut images = Vec::with_capacity(cfg.images);
    for _ in 0..cfg.images {
        let is_fg = grow_region(&grid, n, k, cfg.spatial_tightness, &mut rng);

        let superpixels: Vec<Superpixel> = (0..n)
            .map(|j| {
                let fg = is_fg[j];
                let (c, r) = grid.cell(j);
                let jitter_x = 0.2 * (unit(&mut rng) - 0.5);
                let jitter_y = 0.2 * (unit(&mut rng) - 0.5);
                let position = vec![
                    ((c as f64 + 0.5 + jitter_x) * grid.cell_w / cfg.width as f64).clamp(0.0, 1.0),
                    ((r as f64 + 0.5 + jitter_y) * grid.cell_h / cfg.height as f64).clamp(0.0, 1.0),
                ];
                let color = if fg {
                    fg_color
                        .iter()
                        .map(|c| (c + color_noise.sample(&mut rng)).clamp(0.0, 1.0))
                        .collect()
                } else {
                    vec![unit(&mut rng), unit(&mut rng), unit(&mut rng)]
                };
                let features = (0..d)
                    .map(|t| {
                        let noise: f64 = StandardNormal.sample(&mut rng);
                        if fg {
                            direction[t] + noise
                        } else {
                            noise
                        }
                    })
                    .collect();
                let target = if fg { FG_SALIENCY } else { BG_SALIENCY };
                // with probability 1 - correlation the saliency is clutter
                let follows = unit(&mut rng) < cfg.saliency_correlation;
                let spread = SALIENCY_SPREAD * (unit(&mut rng) - 0.5);
                let saliency = if follows {
                    (target + spread).clamp(0.0, 1.0)
                } else {
                    unit(&mut rng)
                };
                Superpixel {
                    id: j,
                    features,
                    position,
                    color,
                    saliency,
                    pixel_count: cell_pixels,
                    gt_foreground: Some(fg),
                }
            })
            .collect();

        let planted: Vec<usize> = (0..n).filter(|&j| is_fg[j]).collect();
        // dilate with the background cells that grow the rectangle least
        let mut true_members = planted.clone();
        for _ in 0..cfg.dilation {
            let best = (0..n).filter(|j| !true_members.contains(j)).min_by(|&a, &b| {
                let area = |j: usize| {
                    let mut t = true_members.clone();
                    t.push(j);
                    grid.rect(&t).area()
                };
                area(a).total_cmp(&area(b)).then(a.cmp(&b))
            });
            match best {
                Some(j) => true_members.push(j),
                None => break,
            }
        }
        true_members.sort_unstable();

        let true_slot = rng.random_range(0..m);
        let mut boxes = Vec::with_capacity(m);
        for b in 0..m {
            let members = if b == true_slot {
                true_members.clone()
            } else {
                let size = rng.random_range(1..=n);
                let mut pool: Vec<usize> = (0..n).collect();
                pool.shuffle(&mut rng);
                let mut chosen = pool[..size].to_vec();
                chosen.sort_unstable();
                chosen
            };
            let mut features = vec![0.0; d];
            for &j in &members {
                for (f, v) in features.iter_mut().zip(&superpixels[j].features) {
                    *f += v / members.len() as f64;
                }
            }
            features.iter_mut().for_each(|f| *f += box_noise.sample(&mut rng));
            let pixels: f64 = members.iter().map(|&j| superpixels[j].pixel_count as f64).sum();
            let saliency = members
                .iter()
                .map(|&j| superpixels[j].saliency * superpixels[j].pixel_count as f64)
                .sum::<f64>()
                / pixels;
            boxes.push(BoundingBox {
                id: b,
                rect: grid.rect(&members),
                members,
                features,
                saliency: saliency.clamp(0.0, 1.0),
            });
        }
        images.push(ImageInstance {
            width: cfg.width,
            height: cfg.height,
            superpixels,
            boxes,
            gt_box: Some(grid.rect(&planted)),
        });
    }
    Ok(InstanceSet::new(images))
}

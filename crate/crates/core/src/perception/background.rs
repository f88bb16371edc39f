use super::PerceptionError;
use crate::lidar_frames::{LidarFrame, PointCloud};

/// Per-pixel reference range of the empty scene.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    width: usize,
    height: usize,
    range_m: Vec<f64>,
    valid: Vec<bool>,
}

impl BackgroundModel {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn range_m(&self, row: usize, col: usize) -> f64 {
        self.range_m[row * self.width + col]
    }

    /// False for persistent holes, which cannot be compared against.
    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[row * self.width + col]
    }

    pub fn invalid_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }
}

/// Median range of each pixel over the first `n` frames. Pixels that are
/// holes in at least half of the frames are marked invalid.
///
/// Frames must share a stagger state; the model uses the same pixel
/// coordinates as point clouds built from such frames.
pub fn build_background(
    frames: &[LidarFrame],
    n: usize,
    range_unit_m: f64,
) -> Result<BackgroundModel, PerceptionError> {
    if n == 0 || frames.is_empty() {
        return Err(PerceptionError::NoFrames);
    }
    let used = &frames[..n.min(frames.len())];
    let (w, h) = (used[0].width(), used[0].height());
    if let Some(f) = used.iter().find(|f| f.width() != w || f.height() != h || f.staggered != used[0].staggered) {
        return Err(PerceptionError::InvalidParameter(format!(
            "background frame at t={} differs in size or stagger state",
            f.frame_timestamp_ns
        )));
    }
    let mut range_m = vec![0.0; w * h];
    let mut valid = vec![false; w * h];
    let mut samples = Vec::with_capacity(used.len());
    for i in 0..w * h {
        samples.clear();
        samples.extend(used.iter().map(|f| f.range.pixels()[i]));
        let zeros = samples.iter().filter(|v| **v == 0).count();
        if 2 * zeros >= samples.len() {
            continue;
        }
        samples.sort_unstable();
        let m = samples.len();
        let median = if m % 2 == 1 {
            samples[m / 2] as f64
        } else {
            (samples[m / 2 - 1] as f64 + samples[m / 2] as f64) / 2.0
        };
        range_m[i] = median * range_unit_m;
        valid[i] = true;
    }
    Ok(BackgroundModel {
        width: w,
        height: h,
        range_m,
        valid,
    })
}

/// Keep points whose range differs from the background by more than `delta`.
/// Points on invalid or uncovered pixels are kept.
pub fn remove_background(cloud: &PointCloud, model: &BackgroundModel, delta: f64) -> PointCloud {
    let kept = cloud
        .points
        .iter()
        .filter(|p| {
            if p.row >= model.height || p.col >= model.width || !model.is_valid(p.row, p.col) {
                return true;
            }
            (p.range_m - model.range_m(p.row, p.col)).abs() > delta
        })
        .copied()
        .collect();
    cloud.with_points(kept)
}

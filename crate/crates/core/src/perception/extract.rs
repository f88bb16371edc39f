use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{dbscan, reject_outliers, remove_background, segment_plane, Annotations, BackgroundModel, PerceptionError};
use crate::lidar_frames::{frame_to_point_cloud, LidarFrame, PointCloud, SensorModel, DEFAULT_RESIZE_HEIGHT, NATIVE_HEIGHT};
use crate::{TimestampNs, Vec3};

/// Detection box in destaggered, resized image pixels (COCO `[x, y, w, h]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub confidence: f64,
    pub class_id: i64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self {
            x,
            y,
            w,
            h,
            confidence: 1.0,
            class_id: 1,
        }
    }

    /// Native-grid rows and columns covered by the box, clamped to a
    /// `width × height` image. Rows are scaled back by integer division of
    /// `y` and `h` by `resize_factor`. `None` when nothing is left.
    pub fn native_rect(&self, width: usize, height: usize, resize_factor: usize) -> Option<(Range<usize>, Range<usize>)> {
        if !(self.x.is_finite() && self.y.is_finite() && self.w > 0.0 && self.h > 0.0) {
            return None;
        }
        let f = resize_factor.max(1) as i64;
        let (x, y, w, h) = (self.x as i64, self.y as i64, self.w as i64, self.h as i64);
        let r0 = y.div_euclid(f);
        let r1 = r0 + h / f;
        let clamp = |v: i64, hi: usize| v.clamp(0, hi as i64) as usize;
        let rows = clamp(r0, height)..clamp(r1, height);
        let cols = clamp(x, width)..clamp(x + w, width);
        (!rows.is_empty() && !cols.is_empty()).then_some((rows, cols))
    }
}

/// Supplies detection boxes per frame.
pub trait DetectionProvider {
    fn detect(&self, frame_index: usize, frame: &LidarFrame) -> Vec<BoundingBox>;
}

/// Replays stored annotations verbatim.
#[derive(Debug, Clone, Default)]
pub struct AnnotationReplay {
    pub annotations: Annotations,
}

impl DetectionProvider for AnnotationReplay {
    fn detect(&self, frame_index: usize, _frame: &LidarFrame) -> Vec<BoundingBox> {
        self.annotations.boxes(frame_index).to_vec()
    }
}

/// Perfect detector for synthetic scenes: the tight box around the pixels a
/// renderer labelled as human.
#[derive(Debug, Clone, Default)]
pub struct SyntheticOracle {
    boxes: BTreeMap<usize, Vec<BoundingBox>>,
}

impl SyntheticOracle {
    /// Register the human pixels (destaggered native `(row, col)`) of a frame.
    pub fn record(&mut self, frame_index: usize, human_pixels: &[(usize, usize)], resize_factor: usize) {
        let entry = self.boxes.entry(frame_index).or_default();
        if let Some(b) = Self::tight_box(human_pixels, resize_factor) {
            entry.push(b);
        }
    }

    pub fn tight_box(pixels: &[(usize, usize)], resize_factor: usize) -> Option<BoundingBox> {
        let r0 = pixels.iter().map(|p| p.0).min()?;
        let r1 = pixels.iter().map(|p| p.0).max()?;
        let c0 = pixels.iter().map(|p| p.1).min()?;
        let c1 = pixels.iter().map(|p| p.1).max()?;
        let f = resize_factor as f64;
        Some(BoundingBox::new(
            c0 as f64,
            r0 as f64 * f,
            (c1 - c0 + 1) as f64,
            (r1 - r0 + 1) as f64 * f,
        ))
    }
}

impl DetectionProvider for SyntheticOracle {
    fn detect(&self, frame_index: usize, _frame: &LidarFrame) -> Vec<BoundingBox> {
        self.boxes.get(&frame_index).cloned().unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerceptionConfig {
    pub dbscan_eps_m: f64,
    pub dbscan_min_pts: usize,
    pub plane_threshold_m: f64,
    pub plane_iterations: usize,
    pub plane_seed: u64,
    /// Largest tilt of a plane's normal from world z for it to count as floor.
    pub floor_max_tilt_deg: f64,
    pub background_delta_m: f64,
    pub background_frames: usize,
    pub outlier_k: usize,
    pub outlier_std_ratio: f64,
    /// Rows of the detector image per native row.
    pub resize_factor: usize,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            dbscan_eps_m: 0.12,
            dbscan_min_pts: 8,
            plane_threshold_m: 0.02,
            plane_iterations: 200,
            plane_seed: 0,
            floor_max_tilt_deg: 15.0,
            background_delta_m: 0.10,
            background_frames: 50,
            outlier_k: 10,
            outlier_std_ratio: 3.0,
            resize_factor: DEFAULT_RESIZE_HEIGHT / NATIVE_HEIGHT,
        }
    }
}

/// Points whose source pixel lies inside the box. Pixel tests use destaggered
/// columns, the coordinate system detection boxes live in.
pub fn project_box_to_cloud(
    frame: &LidarFrame,
    sensor: &SensorModel,
    bbox: &BoundingBox,
    resize_factor: usize,
) -> Result<PointCloud, PerceptionError> {
    let cloud = frame_to_point_cloud(frame, sensor)?;
    let Some((rows, cols)) = bbox.native_rect(frame.width(), frame.height(), resize_factor) else {
        return Ok(cloud.with_points(Vec::new()));
    };
    let kept = cloud
        .points
        .iter()
        .filter(|p| {
            let col = if frame.staggered { frame.destaggered_col(p.row, p.col) } else { p.col };
            rows.contains(&p.row) && cols.contains(&col)
        })
        .copied()
        .collect();
    Ok(cloud.with_points(kept))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumanPointSet {
    pub points: PointCloud,
    pub source_box: BoundingBox,
    pub frame_timestamp_ns: TimestampNs,
}

impl HumanPointSet {
    pub fn positions(&self) -> Vec<Vec3> {
        self.points.positions()
    }
}

/// Pipeline stage after which nothing was left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotFoundStage {
    Projection,
    Background,
    Outliers,
    Floor,
    Clustering,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Extraction {
    Human(HumanPointSet),
    NotFound(NotFoundStage),
}

impl Extraction {
    pub fn human(&self) -> Option<&HumanPointSet> {
        match self {
            Extraction::Human(h) => Some(h),
            Extraction::NotFound(_) => None,
        }
    }
}

/// Box projection → background removal → outlier rejection → floor removal →
/// DBSCAN, returning the largest cluster.
pub fn extract_human(
    frame: &LidarFrame,
    sensor: &SensorModel,
    bbox: &BoundingBox,
    background: &BackgroundModel,
    cfg: &PerceptionConfig,
) -> Result<Extraction, PerceptionError> {
    use NotFoundStage::*;
    let cloud = project_box_to_cloud(frame, sensor, bbox, cfg.resize_factor)?;
    if cloud.is_empty() {
        return Ok(Extraction::NotFound(Projection));
    }
    let cloud = remove_background(&cloud, background, cfg.background_delta_m);
    if cloud.is_empty() {
        return Ok(Extraction::NotFound(Background));
    }
    let mut cloud = reject_outliers(&cloud, cfg.outlier_k, cfg.outlier_std_ratio);
    if cloud.is_empty() {
        return Ok(Extraction::NotFound(Outliers));
    }

    if cloud.len() >= 3 {
        let fit = segment_plane(&cloud.positions(), cfg.plane_threshold_m, cfg.plane_iterations, cfg.plane_seed)?;
        let tilt = fit.normal.z.abs().clamp(0.0, 1.0).acos().to_degrees();
        if tilt <= cfg.floor_max_tilt_deg {
            let mut is_floor = vec![false; cloud.len()];
            for &i in &fit.inliers {
                is_floor[i] = true;
            }
            let keep: Vec<usize> = (0..cloud.len()).filter(|&i| !is_floor[i]).collect();
            tracing::debug!(floor = fit.inliers.len(), kept = keep.len(), "floor plane removed");
            cloud = cloud.select(&keep);
        }
    }
    if cloud.is_empty() {
        return Ok(Extraction::NotFound(Floor));
    }

    let labels = dbscan(&cloud.positions(), cfg.dbscan_eps_m, cfg.dbscan_min_pts);
    let mut sizes: BTreeMap<i32, usize> = BTreeMap::new();
    for &l in labels.iter().filter(|&&l| l >= 0) {
        *sizes.entry(l).or_default() += 1;
    }
    let Some(best) = sizes
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(&l, _)| l)
    else {
        return Ok(Extraction::NotFound(Clustering));
    };
    let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == best).collect();
    Ok(Extraction::Human(HumanPointSet {
        points: cloud.select(&members),
        source_box: *bbox,
        frame_timestamp_ns: frame.frame_timestamp_ns,
    }))
}

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ChannelImage, ChannelKind, LidarError};
use crate::kinematics::RigidTransform;
use crate::{TimestampNs, Vec3};

/// Native OS0-32 image size.
pub const NATIVE_WIDTH: usize = 1024;
pub const NATIVE_HEIGHT: usize = 32;

/// The four channel images of one scan plus timing metadata.
///
/// Rows are beams (row 0 = highest altitude), columns are azimuth steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarFrame {
    pub range: ChannelImage,
    pub signal: ChannelImage,
    pub near_ir: ChannelImage,
    pub reflectivity: ChannelImage,
    pub column_timestamps_ns: Vec<TimestampNs>,
    pub pixel_shift_by_row: Vec<i32>,
    pub frame_timestamp_ns: TimestampNs,
    pub staggered: bool,
}

impl LidarFrame {
    pub fn width(&self) -> usize {
        self.range.width()
    }

    pub fn height(&self) -> usize {
        self.range.height()
    }

    pub fn channel(&self, kind: ChannelKind) -> &ChannelImage {
        match kind {
            ChannelKind::Range => &self.range,
            ChannelKind::Signal => &self.signal,
            ChannelKind::NearIr => &self.near_ir,
            ChannelKind::Reflectivity => &self.reflectivity,
        }
    }

    pub fn channels(&self) -> [&ChannelImage; 4] {
        [&self.range, &self.signal, &self.near_ir, &self.reflectivity]
    }

    /// Checks every structural invariant of the frame.
    pub fn validate(&self) -> Result<(), LidarError> {
        for kind in ChannelKind::ALL {
            let img = self.channel(kind);
            if img.kind() != kind {
                return Err(LidarError::InvalidImage(format!(
                    "{kind} slot holds a {} image",
                    img.kind()
                )));
            }
            if !img.same_dims(&self.range) {
                return Err(LidarError::DimensionMismatch {
                    channel: kind,
                    expected: (self.width(), self.height()),
                    got: (img.width(), img.height()),
                });
            }
        }
        self.check_shift_table()?;
        if self.column_timestamps_ns.len() != self.width() {
            return Err(LidarError::MalformedMetadata(format!(
                "{} column timestamps for {} columns",
                self.column_timestamps_ns.len(),
                self.width()
            )));
        }
        if self.column_timestamps_ns.windows(2).any(|w| w[1] < w[0]) {
            return Err(LidarError::MalformedMetadata(
                "column timestamps decrease".into(),
            ));
        }
        Ok(())
    }

    fn check_shift_table(&self) -> Result<(), LidarError> {
        if self.pixel_shift_by_row.len() != self.height() {
            return Err(LidarError::MalformedMetadata(format!(
                "pixel_shift_by_row has {} entries for {} rows",
                self.pixel_shift_by_row.len(),
                self.height()
            )));
        }
        Ok(())
    }

    /// Column of the azimuth-aligned grid that staggered column `col` of `row`
    /// lands in.
    pub fn destaggered_col(&self, row: usize, col: usize) -> usize {
        shifted(col, self.pixel_shift_by_row[row], self.width())
    }
}

fn shifted(col: usize, shift: i32, width: usize) -> usize {
    (col as i64 + shift as i64).rem_euclid(width as i64) as usize
}

fn shift_rows(img: &ChannelImage, shifts: &[i32], sign: i32) -> ChannelImage {
    let w = img.width();
    let mut out = vec![0u16; img.pixels().len()];
    for (r, &s) in shifts.iter().enumerate() {
        let src = img.row(r);
        let dst = &mut out[r * w..(r + 1) * w];
        for (c, &v) in src.iter().enumerate() {
            dst[shifted(c, sign * s, w)] = v;
        }
    }
    img.with_pixels(img.bit_depth(), w, img.height(), out)
}

fn apply_shifts(frame: &LidarFrame, sign: i32) -> LidarFrame {
    let shifts = &frame.pixel_shift_by_row;
    LidarFrame {
        range: shift_rows(&frame.range, shifts, sign),
        signal: shift_rows(&frame.signal, shifts, sign),
        near_ir: shift_rows(&frame.near_ir, shifts, sign),
        reflectivity: shift_rows(&frame.reflectivity, shifts, sign),
        column_timestamps_ns: frame.column_timestamps_ns.clone(),
        pixel_shift_by_row: frame.pixel_shift_by_row.clone(),
        frame_timestamp_ns: frame.frame_timestamp_ns,
        staggered: sign < 0,
    }
}

/// Cyclically shift row `r` of every channel right by `pixel_shift_by_row[r]`
/// so each column holds returns from a single azimuth.
pub fn destagger(frame: &LidarFrame) -> Result<LidarFrame, LidarError> {
    frame.check_shift_table()?;
    if !frame.staggered {
        return Err(LidarError::Precondition("frame is already destaggered".into()));
    }
    Ok(apply_shifts(frame, 1))
}

/// Exact inverse of [`destagger`].
pub fn restagger(frame: &LidarFrame) -> Result<LidarFrame, LidarError> {
    frame.check_shift_table()?;
    if frame.staggered {
        return Err(LidarError::Precondition("frame is already staggered".into()));
    }
    Ok(apply_shifts(frame, -1))
}

/// Per-beam angles (degrees) used to turn range pixels into 3D points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamIntrinsics {
    /// Elevation of each row, top row first.
    pub beam_altitude_angles: Vec<f64>,
    /// Per-row azimuth offset added to the column azimuth.
    pub beam_azimuth_angles: Vec<f64>,
}

impl BeamIntrinsics {
    /// Evenly spaced beams spanning `±vertical_fov_deg / 2`, no azimuth offsets.
    /// `uniform(32, 90.0)` approximates an OS0-32.
    pub fn uniform(rows: usize, vertical_fov_deg: f64) -> Self {
        let half = vertical_fov_deg / 2.0;
        let step = if rows > 1 {
            vertical_fov_deg / (rows - 1) as f64
        } else {
            0.0
        };
        Self {
            beam_altitude_angles: (0..rows).map(|r| half - step * r as f64).collect(),
            beam_azimuth_angles: vec![0.0; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.beam_altitude_angles.len()
    }

    pub fn validate(&self, height: usize) -> Result<(), LidarError> {
        if self.beam_altitude_angles.len() != height || self.beam_azimuth_angles.len() != height {
            return Err(LidarError::MalformedMetadata(format!(
                "beam intrinsics have {}/{} rows for a {height}-row image",
                self.beam_altitude_angles.len(),
                self.beam_azimuth_angles.len()
            )));
        }
        Ok(())
    }

    /// Azimuth (rad) of azimuth-aligned column `col`: column 0 looks along −x,
    /// the centre column along +x, and azimuth decreases left to right.
    pub fn azimuth(&self, row: usize, col: usize, width: usize) -> f64 {
        PI - 2.0 * PI * col as f64 / width as f64 + self.beam_azimuth_angles[row].to_radians()
    }

    /// Unit ray in the sensor frame for an azimuth-aligned pixel.
    pub fn direction(&self, row: usize, col: usize, width: usize) -> Vec3 {
        let az = self.azimuth(row, col, width);
        let alt = self.beam_altitude_angles[row].to_radians();
        Vec3::new(alt.cos() * az.cos(), alt.cos() * az.sin(), alt.sin())
    }

    /// Nearest azimuth-aligned pixel for a sensor-frame direction, or `None`
    /// when it lies outside the vertical field of view.
    pub fn pixel_for(&self, dir: &Vec3, width: usize) -> Option<(usize, usize)> {
        let horizontal = dir.x.hypot(dir.y);
        let alt = dir.z.atan2(horizontal).to_degrees();
        let rows = self.rows();
        let (top, bottom) = (self.beam_altitude_angles[0], self.beam_altitude_angles[rows - 1]);
        let half_step = if rows > 1 { (top - bottom).abs() / (rows - 1) as f64 / 2.0 } else { 0.5 };
        if alt > top.max(bottom) + half_step || alt < top.min(bottom) - half_step {
            return None;
        }
        let row = (0..rows)
            .min_by(|&a, &b| {
                (self.beam_altitude_angles[a] - alt)
                    .abs()
                    .total_cmp(&(self.beam_altitude_angles[b] - alt).abs())
            })
            .expect("non-empty intrinsics");
        let az = dir.y.atan2(dir.x) - self.beam_azimuth_angles[row].to_radians();
        let col = ((PI - az) * width as f64 / (2.0 * PI)).round() as i64;
        Some((row, col.rem_euclid(width as i64) as usize))
    }
}

/// Everything needed to turn a frame into world-frame points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub intrinsics: BeamIntrinsics,
    /// Metres per range count.
    #[serde(default = "default_range_unit")]
    pub range_unit_m: f64,
    /// Sensor pose in the world (the calibrated common frame).
    #[serde(default)]
    pub pose: RigidTransform,
}

pub(crate) fn default_range_unit() -> f64 {
    0.001
}

impl SensorModel {
    pub fn new(intrinsics: BeamIntrinsics, range_unit_m: f64, pose: RigidTransform) -> Self {
        Self {
            intrinsics,
            range_unit_m,
            pose,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub position: Vec3,
    /// Distance from the sensor origin (m).
    pub range_m: f64,
    pub row: usize,
    pub col: usize,
}

/// 3D points that remember the image pixel they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<CloudPoint>,
    pub frame_id: String,
    /// `(width, height)` of the image grid the pixel coordinates refer to.
    pub grid: (usize, usize),
}

impl PointCloud {
    pub fn empty(frame_id: impl Into<String>, grid: (usize, usize)) -> Self {
        Self {
            points: Vec::new(),
            frame_id: frame_id.into(),
            grid,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.points.iter().map(|p| p.position).collect()
    }

    /// Same metadata, different point list.
    pub fn with_points(&self, points: Vec<CloudPoint>) -> PointCloud {
        PointCloud {
            points,
            frame_id: self.frame_id.clone(),
            grid: self.grid,
        }
    }

    pub fn select(&self, indices: &[usize]) -> PointCloud {
        self.with_points(indices.iter().map(|&i| self.points[i]).collect())
    }
}

/// World-frame point cloud of every non-zero range pixel.
///
/// Pixel coordinates are those of the frame as given: for a staggered frame
/// the azimuth comes from the destaggered column while `col` stays the
/// staggered one, so the 2D⇔3D mapping survives destaggering.
pub fn frame_to_point_cloud(frame: &LidarFrame, sensor: &SensorModel) -> Result<PointCloud, LidarError> {
    frame.check_shift_table()?;
    sensor.intrinsics.validate(frame.height())?;
    let (w, h) = (frame.width(), frame.height());
    let mut points = Vec::new();
    for row in 0..h {
        for (col, &raw) in frame.range.row(row).iter().enumerate() {
            if raw == 0 {
                continue;
            }
            let aligned_col = if frame.staggered {
                frame.destaggered_col(row, col)
            } else {
                col
            };
            let range_m = raw as f64 * sensor.range_unit_m;
            let local = sensor.intrinsics.direction(row, aligned_col, w) * range_m;
            points.push(CloudPoint {
                position: sensor.pose.transform_point(&local),
                range_m,
                row,
                col,
            });
        }
    }
    Ok(PointCloud {
        points,
        frame_id: "world".into(),
        grid: (w, h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lidar_frames::BitDepth;

    fn frame_from_rows(rows: &[&[u16]], shifts: Vec<i32>) -> LidarFrame {
        let w = rows[0].len();
        let h = rows.len();
        let pixels: Vec<u16> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        let img = |kind| ChannelImage::new(w, h, BitDepth::Sixteen, kind, pixels.clone()).unwrap();
        LidarFrame {
            range: img(ChannelKind::Range),
            signal: img(ChannelKind::Signal),
            near_ir: img(ChannelKind::NearIr),
            reflectivity: img(ChannelKind::Reflectivity),
            column_timestamps_ns: (0..w as i64).collect(),
            pixel_shift_by_row: shifts,
            frame_timestamp_ns: 0,
            staggered: true,
        }
    }

    #[test]
    fn zero_shifts_are_identity() {
        let f = frame_from_rows(&[&[1, 2, 3, 4], &[5, 6, 7, 8]], vec![0, 0]);
        let d = destagger(&f).unwrap();
        assert_eq!(d.reflectivity, f.reflectivity);
        assert!(!d.staggered);
    }

    #[test]
    fn one_pixel_shift_rotates_row_right() {
        let (a, b, c, d) = (10, 20, 30, 40);
        let f = frame_from_rows(&[&[a, b, c, d], &[1, 2, 3, 4]], vec![1, 0]);
        let out = destagger(&f).unwrap();
        assert_eq!(out.signal.row(0), &[d, a, b, c]);
        assert_eq!(out.signal.row(1), &[1, 2, 3, 4]);
        let back = restagger(&out).unwrap();
        assert_eq!(back.signal.row(0), &[a, b, c, d]);
        assert_eq!(back, f);
    }

    #[test]
    fn negative_and_large_shifts_wrap() {
        let f = frame_from_rows(&[&[1, 2, 3, 4], &[5, 6, 7, 8]], vec![-1, 6]);
        let out = destagger(&f).unwrap();
        assert_eq!(out.range.row(0), &[2, 3, 4, 1]);
        assert_eq!(out.range.row(1), &[7, 8, 5, 6]);
    }

    #[test]
    fn malformed_shift_table() {
        let f = frame_from_rows(&[&[1, 2], &[3, 4]], vec![0]);
        assert!(matches!(destagger(&f), Err(LidarError::MalformedMetadata(_))));
        assert!(f.validate().is_err());
    }

    #[test]
    fn double_destagger_is_rejected() {
        let f = frame_from_rows(&[&[1, 2]], vec![1]);
        let d = destagger(&f).unwrap();
        assert!(matches!(destagger(&d), Err(LidarError::Precondition(_))));
        assert!(matches!(restagger(&f), Err(LidarError::Precondition(_))));
    }

    #[test]
    fn point_cloud_mapping_survives_destagger() {
        let rows: Vec<Vec<u16>> = (0..4u16)
            .map(|r| (0..8u16).map(|c| 1000 + r * 100 + c * 7).collect())
            .collect();
        let refs: Vec<&[u16]> = rows.iter().map(|r| r.as_slice()).collect();
        let f = frame_from_rows(&refs, vec![3, 1, -2, 0]);
        let sensor = SensorModel::new(BeamIntrinsics::uniform(4, 30.0), 0.001, RigidTransform::identity());
        let staggered = frame_to_point_cloud(&f, &sensor).unwrap();
        let d = destagger(&f).unwrap();
        let aligned = frame_to_point_cloud(&d, &sensor).unwrap();
        assert_eq!(staggered.len(), aligned.len());
        for p in &staggered.points {
            let col = f.destaggered_col(p.row, p.col);
            let q = aligned
                .points
                .iter()
                .find(|q| q.row == p.row && q.col == col)
                .unwrap();
            assert!((q.position - p.position).norm() < 1e-12);
            assert_eq!(d.range.get(q.row, q.col), f.range.get(p.row, p.col));
        }
    }

    #[test]
    fn zero_range_pixels_are_holes() {
        let f = frame_from_rows(&[&[0, 1000], &[2000, 0]], vec![0, 0]);
        let sensor = SensorModel::new(BeamIntrinsics::uniform(2, 10.0), 0.001, RigidTransform::identity());
        let cloud = frame_to_point_cloud(&f, &sensor).unwrap();
        assert_eq!(cloud.len(), 2);
        assert!((cloud.points[0].range_m - 1.0).abs() < 1e-15);
        assert!((cloud.points[0].position.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pixel_lookup_inverts_direction() {
        let intr = BeamIntrinsics::uniform(32, 90.0);
        for row in [0, 7, 16, 31] {
            for col in [0, 1, 300, 512, 1023] {
                let dir = intr.direction(row, col, 1024);
                assert_eq!(intr.pixel_for(&dir, 1024), Some((row, col)));
            }
        }
        assert_eq!(intr.pixel_for(&Vec3::new(0.0, 0.0, 1.0), 1024), None);
        // Centre column looks along +x.
        assert!((intr.direction(15, 512, 1024).y).abs() < 1e-12);
        assert!(intr.direction(15, 512, 1024).x > 0.0);
    }
}

//! Ray-cast synthetic lidar frames of a floor and a capsule phantom.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::lidar_frames::{BeamIntrinsics, BitDepth, ChannelImage, ChannelKind, LidarFrame, SensorModel};
use crate::{TimestampNs, Vec3};

/// Distance along a ray `o + t·d` (unit `d`) to a capsule, if hit.
pub fn ray_capsule(o: &Vec3, d: &Vec3, p0: &Vec3, p1: &Vec3, radius: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut take = |t: f64| {
        if t > 0.0 && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    };
    // Cylinder body.
    let axis = p1 - p0;
    let len = axis.norm();
    if len > 0.0 {
        let a = axis / len;
        let m = o - p0;
        let dp = d - a * d.dot(&a);
        let mp = m - a * m.dot(&a);
        let qa = dp.norm_squared();
        let qb = 2.0 * dp.dot(&mp);
        let qc = mp.norm_squared() - radius * radius;
        let disc = qb * qb - 4.0 * qa * qc;
        if qa > 1e-15 && disc >= 0.0 {
            let sq = disc.sqrt();
            for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
                let s = (o + d * t - p0).dot(&a);
                if (0.0..=len).contains(&s) {
                    take(t);
                }
            }
        }
    }
    // End caps.
    for c in [p0, p1] {
        let m = o - c;
        let b = m.dot(d);
        let disc = b * b - (m.norm_squared() - radius * radius);
        if disc >= 0.0 {
            let sq = disc.sqrt();
            take(-b - sq);
            take(-b + sq);
        }
    }
    best
}

/// Distance along a ray to the floor `z = 0`, if hit.
pub fn ray_floor(o: &Vec3, d: &Vec3) -> Option<f64> {
    (d.z < -1e-12 && o.z > 0.0).then(|| -o.z / d.z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapsulePhantom {
    pub p0: Vec3,
    pub p1: Vec3,
    pub radius: f64,
}

/// Objects in the synthetic room.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SyntheticScene {
    pub floor: bool,
    pub humans: Vec<CapsulePhantom>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitLabel {
    Floor,
    Human(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedFrame {
    /// Azimuth-aligned (destaggered) frame.
    pub frame: LidarFrame,
    /// Label of every non-hole pixel, row-major, `None` for holes.
    pub labels: Vec<Option<HitLabel>>,
}

impl RenderedFrame {
    pub fn pixels_of(&self, label: HitLabel) -> Vec<(usize, usize)> {
        let w = self.frame.width();
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(label))
            .map(|(i, _)| (i / w, i % w))
            .collect()
    }
}

/// Synthetic per-row shift table shaped like a real sensor's (a repeating
/// staircase); only used as metadata when frames are restaggered.
pub fn synthetic_shift_table(rows: usize) -> Vec<i32> {
    (0..rows).map(|r| [18, 12, 6, 0][r % 4]).collect()
}

/// Render one frame at `timestamp_ns` with Gaussian range noise of
/// `range_sigma_m`. Ranges are quantised to the sensor's range unit.
pub fn render_frame(
    sensor: &SensorModel,
    width: usize,
    scene: &SyntheticScene,
    timestamp_ns: TimestampNs,
    period_ns: TimestampNs,
    range_sigma_m: f64,
    rng: &mut impl Rng,
) -> RenderedFrame {
    let intr: &BeamIntrinsics = &sensor.intrinsics;
    let height = intr.rows();
    let origin = *sensor.pose.translation();
    let noise = Normal::new(0.0, range_sigma_m.max(0.0)).expect("finite sigma");
    let max_count = u16::MAX as f64;
    let mut range = vec![0u16; width * height];
    let mut signal = vec![0u16; width * height];
    let mut reflectivity = vec![0u16; width * height];
    let mut near_ir = vec![0u16; width * height];
    let mut labels = vec![None; width * height];
    for row in 0..height {
        for col in 0..width {
            let d = sensor.pose.transform_vector(&intr.direction(row, col, width));
            let mut hit: Option<(f64, HitLabel)> = None;
            if scene.floor {
                if let Some(t) = ray_floor(&origin, &d) {
                    hit = Some((t, HitLabel::Floor));
                }
            }
            for (k, h) in scene.humans.iter().enumerate() {
                if let Some(t) = ray_capsule(&origin, &d, &h.p0, &h.p1, h.radius) {
                    if hit.is_none_or(|(b, _)| t < b) {
                        hit = Some((t, HitLabel::Human(k)));
                    }
                }
            }
            let i = row * width + col;
            near_ir[i] = 200 + (rng.random::<f64>() * 50.0) as u16;
            let Some((t, label)) = hit else {
                continue;
            };
            let r = t + if range_sigma_m > 0.0 { noise.sample(rng) } else { 0.0 };
            let counts = (r / sensor.range_unit_m).round();
            if !(counts >= 1.0 && counts <= max_count) {
                continue;
            }
            range[i] = counts as u16;
            labels[i] = Some(label);
            let refl = match label {
                HitLabel::Floor => 0.3,
                HitLabel::Human(_) => 0.6,
            };
            reflectivity[i] = (refl * 255.0) as u16 * 256;
            signal[i] = (refl * 4000.0 / (r * r).max(0.01)).min(max_count) as u16;
        }
    }
    let img = |kind, px| ChannelImage::new(width, height, BitDepth::Sixteen, kind, px).expect("sized buffer");
    let frame = LidarFrame {
        range: img(ChannelKind::Range, range),
        signal: img(ChannelKind::Signal, signal),
        near_ir: img(ChannelKind::NearIr, near_ir),
        reflectivity: img(ChannelKind::Reflectivity, reflectivity),
        column_timestamps_ns: (0..width as i64).map(|c| timestamp_ns + c * period_ns / width as i64).collect(),
        pixel_shift_by_row: synthetic_shift_table(height),
        frame_timestamp_ns: timestamp_ns,
        staggered: false,
    };
    RenderedFrame { frame, labels }
}

/// Surface points of the phantom hit by the sensor's rays (no floor, no
/// occluders), each perturbed by isotropic Gaussian noise of `sigma_m`.
pub fn phantom_points(
    sensor: &SensorModel,
    width: usize,
    phantom: &CapsulePhantom,
    sigma_m: f64,
    rng: &mut impl Rng,
) -> Vec<Vec3> {
    let origin = *sensor.pose.translation();
    let noise = Normal::new(0.0, sigma_m.max(0.0)).expect("finite sigma");
    let mut pts = Vec::new();
    for row in 0..sensor.intrinsics.rows() {
        for col in 0..width {
            let d = sensor.pose.transform_vector(&sensor.intrinsics.direction(row, col, width));
            if let Some(t) = ray_capsule(&origin, &d, &phantom.p0, &phantom.p1, phantom.radius) {
                let mut p = origin + d * t;
                if sigma_m > 0.0 {
                    p += Vec3::new(noise.sample(rng), noise.sample(rng), noise.sample(rng));
                }
                pts.push(p);
            }
        }
    }
    pts
}

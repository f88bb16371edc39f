//! On-disk frame recordings: one directory per sequence holding
//! `{index}_{channel}.png` grayscale images and a `meta.json` sidecar.

use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use serde::{Deserialize, Serialize};

use super::frame::default_range_unit;
use super::{
    BeamIntrinsics, BitDepth, ChannelImage, ChannelKind, LidarError, LidarFrame, SensorModel,
    StackedImage,
};
use crate::kinematics::RigidTransform;
use crate::TimestampNs;

pub const META_FILE: &str = "meta.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub pixel_shift_by_row: Vec<i32>,
    /// One array of per-column capture times per frame.
    pub column_timestamps_ns: Vec<Vec<TimestampNs>>,
    pub frame_timestamps_ns: Vec<TimestampNs>,
    pub beam_intrinsics: BeamIntrinsics,
    #[serde(default = "default_range_unit")]
    pub range_unit_m: f64,
    #[serde(default)]
    pub sensor_pose: RigidTransform,
    /// Whether the stored images are in raw (staggered) column order.
    #[serde(default = "default_staggered")]
    pub staggered: bool,
}

fn default_staggered() -> bool {
    true
}

impl RecordingMeta {
    pub fn sensor_model(&self) -> SensorModel {
        SensorModel::new(self.beam_intrinsics.clone(), self.range_unit_m, self.sensor_pose)
    }

    fn validate(&self) -> Result<(), LidarError> {
        if self.column_timestamps_ns.len() != self.frame_timestamps_ns.len() {
            return Err(LidarError::MalformedMetadata(format!(
                "{} column-timestamp arrays for {} frames",
                self.column_timestamps_ns.len(),
                self.frame_timestamps_ns.len()
            )));
        }
        self.beam_intrinsics.validate(self.pixel_shift_by_row.len())
    }
}

pub fn channel_path(dir: &Path, index: usize, kind: ChannelKind) -> PathBuf {
    dir.join(format!("{index}_{}.png", kind.name()))
}

/// A frame directory opened for reading.
#[derive(Debug, Clone)]
pub struct Recording {
    dir: PathBuf,
    meta: RecordingMeta,
}

impl Recording {
    pub fn open(dir: &Path) -> Result<Self, LidarError> {
        let path = dir.join(META_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| LidarError::io(&path, e))?;
        let meta: RecordingMeta = serde_json::from_str(&text)
            .map_err(|e| LidarError::MalformedMetadata(format!("{}: {e}", path.display())))?;
        meta.validate()?;
        Ok(Self {
            dir: dir.to_path_buf(),
            meta,
        })
    }

    pub fn meta(&self) -> &RecordingMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.meta.frame_timestamps_ns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn frame(&self, index: usize) -> Result<LidarFrame, LidarError> {
        if index >= self.len() {
            return Err(LidarError::MalformedMetadata(format!(
                "frame {index} out of range ({} frames)",
                self.len()
            )));
        }
        let load = |kind| read_channel(&channel_path(&self.dir, index, kind), kind);
        let frame = LidarFrame {
            range: load(ChannelKind::Range)?,
            signal: load(ChannelKind::Signal)?,
            near_ir: load(ChannelKind::NearIr)?,
            reflectivity: load(ChannelKind::Reflectivity)?,
            column_timestamps_ns: self.meta.column_timestamps_ns[index].clone(),
            pixel_shift_by_row: self.meta.pixel_shift_by_row.clone(),
            frame_timestamp_ns: self.meta.frame_timestamps_ns[index],
            staggered: self.meta.staggered,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn frames(&self) -> impl Iterator<Item = Result<LidarFrame, LidarError>> + '_ {
        (0..self.len()).map(|i| self.frame(i))
    }
}

/// Write frames (all with the same shift table) as a recording directory.
pub fn write_recording(
    dir: &Path,
    frames: &[LidarFrame],
    sensor: &SensorModel,
) -> Result<RecordingMeta, LidarError> {
    std::fs::create_dir_all(dir).map_err(|e| LidarError::io(dir, e))?;
    let first = frames
        .first()
        .ok_or_else(|| LidarError::MalformedMetadata("no frames to write".into()))?;
    for (i, f) in frames.iter().enumerate() {
        f.validate()?;
        if f.pixel_shift_by_row != first.pixel_shift_by_row || f.staggered != first.staggered {
            return Err(LidarError::MalformedMetadata(format!(
                "frame {i} metadata differs from frame 0"
            )));
        }
        for kind in ChannelKind::ALL {
            write_channel(&channel_path(dir, i, kind), f.channel(kind))?;
        }
    }
    let meta = RecordingMeta {
        pixel_shift_by_row: first.pixel_shift_by_row.clone(),
        column_timestamps_ns: frames.iter().map(|f| f.column_timestamps_ns.clone()).collect(),
        frame_timestamps_ns: frames.iter().map(|f| f.frame_timestamp_ns).collect(),
        beam_intrinsics: sensor.intrinsics.clone(),
        range_unit_m: sensor.range_unit_m,
        sensor_pose: sensor.pose,
        staggered: first.staggered,
    };
    let path = dir.join(META_FILE);
    let text = serde_json::to_string_pretty(&meta).expect("meta serialises");
    std::fs::write(&path, text).map_err(|e| LidarError::io(&path, e))?;
    Ok(meta)
}

pub fn read_channel(path: &Path, kind: ChannelKind) -> Result<ChannelImage, LidarError> {
    let img = image::open(path).map_err(|e| LidarError::Image(format!("{}: {e}", path.display())))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => ChannelImage::new(
            w,
            h,
            BitDepth::Eight,
            kind,
            buf.into_raw().into_iter().map(u16::from).collect(),
        ),
        DynamicImage::ImageLuma16(buf) => {
            ChannelImage::new(w, h, BitDepth::Sixteen, kind, buf.into_raw())
        }
        other => Err(LidarError::Image(format!(
            "{}: expected a grayscale PNG, found {:?}",
            path.display(),
            other.color()
        ))),
    }
}

pub fn write_channel(path: &Path, img: &ChannelImage) -> Result<(), LidarError> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let result = match img.bit_depth() {
        BitDepth::Sixteen => {
            ImageBuffer::<Luma<u16>, _>::from_raw(w, h, img.pixels().to_vec())
                .expect("buffer size matches")
                .save(path)
        }
        BitDepth::Eight => {
            ImageBuffer::<Luma<u8>, _>::from_raw(w, h, img.pixels().iter().map(|&v| v as u8).collect::<Vec<u8>>())
                .expect("buffer size matches")
                .save(path)
        }
    };
    result.map_err(|e| LidarError::Image(format!("{}: {e}", path.display())))
}

/// Stacked image as an RGB PNG (R = reflectivity, G = signal, B = near-IR).
pub fn write_stacked(path: &Path, img: &StackedImage) -> Result<(), LidarError> {
    ImageBuffer::<Rgb<u8>, _>::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
        .expect("buffer size matches")
        .save(path)
        .map_err(|e| LidarError::Image(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(seed: u16, shifts: Vec<i32>) -> LidarFrame {
        let (w, h) = (16, 4);
        let img = |kind, k: u16| {
            let px = (0..(w * h) as u16).map(|i| i.wrapping_mul(97).wrapping_add(seed * k)).collect();
            ChannelImage::new(w, h, BitDepth::Sixteen, kind, px).unwrap()
        };
        LidarFrame {
            range: img(ChannelKind::Range, 1),
            signal: img(ChannelKind::Signal, 2),
            near_ir: img(ChannelKind::NearIr, 3),
            reflectivity: img(ChannelKind::Reflectivity, 4),
            column_timestamps_ns: (0..w as i64).map(|c| 1000 + c * 10).collect(),
            pixel_shift_by_row: shifts,
            frame_timestamp_ns: 1000 + seed as i64,
            staggered: true,
        }
    }

    #[test]
    fn write_then_read_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let frames = vec![frame(1, vec![0, 1, 2, 3]), frame(2, vec![0, 1, 2, 3])];
        let sensor = SensorModel::new(BeamIntrinsics::uniform(4, 20.0), 0.001, RigidTransform::identity());
        write_recording(dir.path(), &frames, &sensor).unwrap();
        assert!(dir.path().join("1_near_ir.png").exists());
        let rec = Recording::open(dir.path()).unwrap();
        assert_eq!(rec.len(), 2);
        for (i, f) in frames.iter().enumerate() {
            assert_eq!(&rec.frame(i).unwrap(), f);
        }
        assert_eq!(rec.meta().sensor_model(), sensor);
    }

    #[test]
    fn missing_meta_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = Recording::open(dir.path()).unwrap_err();
        assert!(err.to_string().contains("meta.json"), "{err}");
    }

    #[test]
    fn mismatched_intrinsics_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let sensor = SensorModel::new(BeamIntrinsics::uniform(3, 20.0), 0.001, RigidTransform::identity());
        write_recording(dir.path(), &[frame(1, vec![0; 4])], &sensor).unwrap();
        assert!(matches!(Recording::open(dir.path()), Err(LidarError::MalformedMetadata(_))));
    }
}

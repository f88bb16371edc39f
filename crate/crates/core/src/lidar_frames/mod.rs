//! Four-channel lidar frames, the preprocessing chain that turns them into
//! detector input, and channel-similarity analysis.

mod frame;
mod image;
mod preprocess;
mod recording;
mod ssim;

use std::path::Path;

pub use frame::{
    destagger, frame_to_point_cloud, restagger, BeamIntrinsics, CloudPoint, LidarFrame, PointCloud,
    SensorModel, NATIVE_HEIGHT, NATIVE_WIDTH,
};
pub use image::{stack_channels, BitDepth, ChannelImage, ChannelKind, StackedImage, STACK_ORDER};
pub use preprocess::{
    auto_expose, downsample_bit_depth, equalize_histogram, preprocess_channel, preprocess_frame,
    resize_bilinear, Downsampled, PreprocessOptions, PreprocessedFrame, DEFAULT_RESIZE_HEIGHT,
};
pub use recording::{
    channel_path, read_channel, write_channel, write_recording, write_stacked, Recording,
    RecordingMeta, META_FILE,
};
pub use ssim::{channel_ssim_matrix, ssim, ssim_matrix, SSIM_K1, SSIM_K2, SSIM_WINDOW};

#[derive(Debug, thiserror::Error)]
pub enum LidarError {
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("{channel} channel is {}×{} but {}×{} was expected", got.0, got.1, expected.0, expected.1)]
    DimensionMismatch {
        channel: ChannelKind,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("malformed metadata: {0}")]
    MalformedMetadata(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("cannot resize from {from} to {to} rows (downscaling is unsupported)")]
    UnsupportedDownscale { from: usize, to: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("image file {0}")]
    Image(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl LidarError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        LidarError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

//! Image preprocessing chain applied to each channel before detection:
//! destagger → 16→8 bit → bilinear resize → auto-exposure → histogram
//! equalisation.

use serde::{Deserialize, Serialize};

use super::{destagger, stack_channels, BitDepth, ChannelImage, LidarError, LidarFrame, StackedImage};
use crate::TimestampNs;

/// Output height of the resize step (1024×32 → 1024×256).
pub const DEFAULT_RESIZE_HEIGHT: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct Downsampled {
    pub image: ChannelImage,
    /// Input was already 8-bit and was passed through untouched.
    pub already_eight_bit: bool,
}

/// Keep the high byte of every 16-bit value (`v / 256`).
pub fn downsample_bit_depth(img: &ChannelImage) -> Downsampled {
    if img.bit_depth() == BitDepth::Eight {
        tracing::warn!(channel = %img.kind(), "image is already 8-bit; leaving it unchanged");
        return Downsampled {
            image: img.clone(),
            already_eight_bit: true,
        };
    }
    let pixels = img.pixels().iter().map(|v| v >> 8).collect();
    Downsampled {
        image: img.with_pixels(BitDepth::Eight, img.width(), img.height(), pixels),
        already_eight_bit: false,
    }
}

/// Vertical bilinear upscale with corner-aligned sampling: output row `y`
/// samples input row `y·(h−1)/(H−1)`, so the first and last rows are copied
/// exactly. Width is unchanged, so horizontal interpolation is the identity.
pub fn resize_bilinear(img: &ChannelImage, new_height: usize) -> Result<ChannelImage, LidarError> {
    let (w, h) = (img.width(), img.height());
    if new_height < h {
        return Err(LidarError::UnsupportedDownscale {
            from: h,
            to: new_height,
        });
    }
    let mut out = Vec::with_capacity(w * new_height);
    for y in 0..new_height {
        let src = if new_height > 1 && h > 1 {
            y as f64 * (h - 1) as f64 / (new_height - 1) as f64
        } else {
            0.0
        };
        let r0 = (src.floor() as usize).min(h - 1);
        let r1 = (r0 + 1).min(h - 1);
        let frac = src - r0 as f64;
        let (row0, row1) = (img.row(r0), img.row(r1));
        for x in 0..w {
            let v = (1.0 - frac) * row0[x] as f64 + frac * row1[x] as f64;
            out.push(v.round() as u16);
        }
    }
    Ok(img.with_pixels(img.bit_depth(), w, new_height, out))
}

/// Nearest-rank percentile of the pixel values.
fn percentile(sorted: &[u16], p: f64) -> u16 {
    let idx = (p * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Linear stretch mapping the `lo`/`hi` intensity percentiles to the full
/// range of the bit depth, clipping outside them. Images whose percentiles
/// coincide (e.g. constant images) are returned unchanged.
pub fn auto_expose(img: &ChannelImage, lo_percentile: f64, hi_percentile: f64) -> Result<ChannelImage, LidarError> {
    if !(0.0..=1.0).contains(&lo_percentile)
        || !(0.0..=1.0).contains(&hi_percentile)
        || lo_percentile >= hi_percentile
    {
        return Err(LidarError::InvalidParameter(format!(
            "exposure percentiles must satisfy 0 ≤ lo < hi ≤ 1, got ({lo_percentile}, {hi_percentile})"
        )));
    }
    let mut sorted = img.pixels().to_vec();
    sorted.sort_unstable();
    let lo = percentile(&sorted, lo_percentile) as f64;
    let hi = percentile(&sorted, hi_percentile) as f64;
    if hi <= lo {
        tracing::debug!(channel = %img.kind(), "degenerate exposure window; image left unchanged");
        return Ok(img.clone());
    }
    let max = img.bit_depth().max_value() as f64;
    let pixels = img
        .pixels()
        .iter()
        .map(|&v| (((v as f64 - lo) * max / (hi - lo)).round()).clamp(0.0, max) as u16)
        .collect();
    Ok(img.with_pixels(img.bit_depth(), img.width(), img.height(), pixels))
}

/// CDF-based histogram equalisation, `out(v) = ⌊max · cdf(v) / N⌋`.
///
/// Monotone in the input value. Constant images pass through unchanged.
pub fn equalize_histogram(img: &ChannelImage) -> ChannelImage {
    let px = img.pixels();
    if px.iter().all(|&v| v == px[0]) {
        return img.clone();
    }
    let levels = img.bit_depth().levels();
    let mut cdf = vec![0u64; levels];
    for &v in px {
        cdf[v as usize] += 1;
    }
    for i in 1..levels {
        cdf[i] += cdf[i - 1];
    }
    let n = px.len() as u64;
    let max = img.bit_depth().max_value() as u64;
    let pixels = px.iter().map(|&v| (max * cdf[v as usize] / n) as u16).collect();
    img.with_pixels(img.bit_depth(), img.width(), img.height(), pixels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    pub resize_height: usize,
    pub lo_percentile: f64,
    pub hi_percentile: f64,
    pub equalize: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self {
            resize_height: DEFAULT_RESIZE_HEIGHT,
            lo_percentile: 0.01,
            hi_percentile: 0.99,
            equalize: true,
        }
    }
}

/// Fully preprocessed 8-bit channels of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedFrame {
    pub range: ChannelImage,
    pub signal: ChannelImage,
    pub near_ir: ChannelImage,
    pub reflectivity: ChannelImage,
    pub stacked: StackedImage,
    pub frame_timestamp_ns: TimestampNs,
}

impl PreprocessedFrame {
    pub fn channels(&self) -> [&ChannelImage; 4] {
        [&self.range, &self.signal, &self.near_ir, &self.reflectivity]
    }
}

pub fn preprocess_channel(img: &ChannelImage, opts: &PreprocessOptions) -> Result<ChannelImage, LidarError> {
    let eight = downsample_bit_depth(img).image;
    let resized = resize_bilinear(&eight, opts.resize_height)?;
    let exposed = auto_expose(&resized, opts.lo_percentile, opts.hi_percentile)?;
    Ok(if opts.equalize {
        equalize_histogram(&exposed)
    } else {
        exposed
    })
}

pub fn preprocess_frame(frame: &LidarFrame, opts: &PreprocessOptions) -> Result<PreprocessedFrame, LidarError> {
    frame.validate()?;
    let aligned;
    let frame = if frame.staggered {
        aligned = destagger(frame)?;
        &aligned
    } else {
        frame
    };
    let range = preprocess_channel(&frame.range, opts)?;
    let signal = preprocess_channel(&frame.signal, opts)?;
    let near_ir = preprocess_channel(&frame.near_ir, opts)?;
    let reflectivity = preprocess_channel(&frame.reflectivity, opts)?;
    let stacked = stack_channels(&reflectivity, &signal, &near_ir)?;
    Ok(PreprocessedFrame {
        range,
        signal,
        near_ir,
        reflectivity,
        stacked,
        frame_timestamp_ns: frame.frame_timestamp_ns,
    })
}

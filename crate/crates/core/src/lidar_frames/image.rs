use serde::{Deserialize, Serialize};

use super::LidarError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Range,
    Signal,
    NearIr,
    Reflectivity,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 4] = [
        ChannelKind::Range,
        ChannelKind::Signal,
        ChannelKind::NearIr,
        ChannelKind::Reflectivity,
    ];

    /// Name used in recording file names (`{index}_{name}.png`).
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Range => "range",
            ChannelKind::Signal => "signal",
            ChannelKind::NearIr => "near_ir",
            ChannelKind::Reflectivity => "reflectivity",
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn bits(self) -> u32 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    pub fn max_value(self) -> u16 {
        match self {
            BitDepth::Eight => u8::MAX as u16,
            BitDepth::Sixteen => u16::MAX,
        }
    }

    pub fn levels(self) -> usize {
        self.max_value() as usize + 1
    }
}

/// Single-channel intensity image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelImage {
    width: usize,
    height: usize,
    bit_depth: BitDepth,
    kind: ChannelKind,
    pixels: Vec<u16>,
}

impl ChannelImage {
    pub fn new(
        width: usize,
        height: usize,
        bit_depth: BitDepth,
        kind: ChannelKind,
        pixels: Vec<u16>,
    ) -> Result<Self, LidarError> {
        if width == 0 || height == 0 {
            return Err(LidarError::InvalidImage(format!(
                "{kind} image has zero size ({width}×{height})"
            )));
        }
        if pixels.len() != width * height {
            return Err(LidarError::InvalidImage(format!(
                "{kind} image is {width}×{height} but has {} pixels",
                pixels.len()
            )));
        }
        let max = bit_depth.max_value();
        if let Some(v) = pixels.iter().find(|v| **v > max) {
            return Err(LidarError::InvalidImage(format!(
                "{kind} pixel value {v} does not fit in {} bits",
                bit_depth.bits()
            )));
        }
        Ok(Self {
            width,
            height,
            bit_depth,
            kind,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, bit_depth: BitDepth, kind: ChannelKind, value: u16) -> Result<Self, LidarError> {
        Self::new(width, height, bit_depth, kind, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> BitDepth {
        self.bit_depth
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.pixels[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[u16] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    pub fn same_dims(&self, other: &ChannelImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn with_pixels(&self, bit_depth: BitDepth, width: usize, height: usize, pixels: Vec<u16>) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        Self {
            width,
            height,
            bit_depth,
            kind: self.kind,
            pixels,
        }
    }

    pub fn with_kind(mut self, kind: ChannelKind) -> Self {
        self.kind = kind;
        self
    }
}

/// Fixed channel order of [`StackedImage`].
pub const STACK_ORDER: [ChannelKind; 3] = [
    ChannelKind::Reflectivity,
    ChannelKind::Signal,
    ChannelKind::NearIr,
];

/// Depth-wise stack of the reflectivity, signal and near-IR images, in that
/// order, stored interleaved (HWC).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackedImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl StackedImage {
    pub const DEPTH: usize = 3;

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Interleaved `[refl, signal, nir]` bytes per pixel, row-major.
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn fiber(&self, row: usize, col: usize) -> [u8; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Extract one layer as an 8-bit image (`index` follows [`STACK_ORDER`]).
    pub fn channel(&self, index: usize) -> ChannelImage {
        assert!(index < Self::DEPTH, "stack has 3 channels");
        let pixels = self.data.iter().skip(index).step_by(3).map(|&v| v as u16).collect();
        ChannelImage {
            width: self.width,
            height: self.height,
            bit_depth: BitDepth::Eight,
            kind: STACK_ORDER[index],
            pixels,
        }
    }
}

pub fn stack_channels(
    reflectivity: &ChannelImage,
    signal: &ChannelImage,
    near_ir: &ChannelImage,
) -> Result<StackedImage, LidarError> {
    let layers = [reflectivity, signal, near_ir];
    for img in layers {
        if img.bit_depth != BitDepth::Eight {
            return Err(LidarError::InvalidImage(format!(
                "{} channel must be 8-bit before stacking",
                img.kind
            )));
        }
        if !img.same_dims(reflectivity) {
            return Err(LidarError::DimensionMismatch {
                channel: img.kind,
                expected: (reflectivity.width, reflectivity.height),
                got: (img.width, img.height),
            });
        }
    }
    let n = reflectivity.pixels.len();
    let mut data = Vec::with_capacity(n * 3);
    for i in 0..n {
        for img in layers {
            data.push(img.pixels[i] as u8);
        }
    }
    Ok(StackedImage {
        width: reflectivity.width,
        height: reflectivity.height,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_count_must_match() {
        let err = ChannelImage::new(3, 2, BitDepth::Eight, ChannelKind::Signal, vec![0; 5]);
        assert!(err.is_err());
    }

    #[test]
    fn values_must_fit_bit_depth() {
        let err = ChannelImage::new(1, 1, BitDepth::Eight, ChannelKind::Signal, vec![256]);
        assert!(err.is_err());
        assert!(ChannelImage::new(1, 1, BitDepth::Sixteen, ChannelKind::Signal, vec![256]).is_ok());
    }

    #[test]
    fn stack_of_identical_images_has_equal_fibers() {
        let img = ChannelImage::new(2, 2, BitDepth::Eight, ChannelKind::Reflectivity, vec![1, 2, 3, 4])
            .unwrap();
        let s = stack_channels(&img, &img.clone().with_kind(ChannelKind::Signal), &img.clone().with_kind(ChannelKind::NearIr)).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let f = s.fiber(r, c);
                assert!(f[0] == f[1] && f[1] == f[2]);
            }
        }
    }

    #[test]
    fn stack_shape_at_preprocessed_resolution() {
        let refl = ChannelImage::filled(1024, 256, BitDepth::Eight, ChannelKind::Reflectivity, 7).unwrap();
        let sig = ChannelImage::filled(1024, 256, BitDepth::Eight, ChannelKind::Signal, 8).unwrap();
        let nir = ChannelImage::filled(1024, 256, BitDepth::Eight, ChannelKind::NearIr, 9).unwrap();
        let s = stack_channels(&refl, &sig, &nir).unwrap();
        assert_eq!((s.width(), s.height(), s.data().len()), (1024, 256, 1024 * 256 * 3));
        assert_eq!(s.fiber(100, 100), [7, 8, 9]);
    }

    #[test]
    fn stack_mismatch_names_channel() {
        let a = ChannelImage::filled(4, 4, BitDepth::Eight, ChannelKind::Reflectivity, 0).unwrap();
        let b = ChannelImage::filled(4, 3, BitDepth::Eight, ChannelKind::NearIr, 0).unwrap();
        let err = stack_channels(&a, &a.clone().with_kind(ChannelKind::Signal), &b).unwrap_err();
        assert!(err.to_string().contains("near_ir"), "{err}");
    }
}

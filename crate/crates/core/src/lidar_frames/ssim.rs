use super::{BitDepth, ChannelImage, LidarError, LidarFrame};

/// Side of the square averaging window.
pub const SSIM_WINDOW: usize = 8;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Summed-area table with a zero first row/column.
struct Integral {
    w: usize,
    sums: Vec<u64>,
}

impl Integral {
    fn new(w: usize, h: usize, value: impl Fn(usize) -> u64) -> Self {
        let stride = w + 1;
        let mut sums = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u64;
            for x in 0..w {
                row += value(y * w + x);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { w, sums }
    }

    fn window(&self, x: usize, y: usize, ww: usize, wh: usize) -> u64 {
        let s = self.w + 1;
        self.sums[(y + wh) * s + x + ww] + self.sums[y * s + x]
            - self.sums[y * s + x + ww]
            - self.sums[(y + wh) * s + x]
    }
}

/// Mean structural similarity over all 8×8 windows (stride 1, uniform
/// weights), with `c1 = (0.01·L)²`, `c2 = (0.03·L)²` and `L` the maximum value
/// of the bit depth. Images smaller than the window use one full-image window.
pub fn ssim(a: &ChannelImage, b: &ChannelImage) -> Result<f64, LidarError> {
    if !a.same_dims(b) {
        return Err(LidarError::DimensionMismatch {
            channel: b.kind(),
            expected: (a.width(), a.height()),
            got: (b.width(), b.height()),
        });
    }
    let (w, h) = (a.width(), a.height());
    let (pa, pb) = (a.pixels(), b.pixels());
    let sa = Integral::new(w, h, |i| pa[i] as u64);
    let sb = Integral::new(w, h, |i| pb[i] as u64);
    let saa = Integral::new(w, h, |i| pa[i] as u64 * pa[i] as u64);
    let sbb = Integral::new(w, h, |i| pb[i] as u64 * pb[i] as u64);
    let sab = Integral::new(w, h, |i| pa[i] as u64 * pb[i] as u64);

    let l = a.bit_depth().max_value() as f64;
    let c1 = (SSIM_K1 * l).powi(2);
    let c2 = (SSIM_K2 * l).powi(2);
    let (ww, wh) = (SSIM_WINDOW.min(w), SSIM_WINDOW.min(h));
    let n = (ww * wh) as f64;

    let mut total = 0.0;
    let mut count = 0usize;
    for y in 0..=(h - wh) {
        for x in 0..=(w - ww) {
            let mu_a = sa.window(x, y, ww, wh) as f64 / n;
            let mu_b = sb.window(x, y, ww, wh) as f64 / n;
            let var_a = saa.window(x, y, ww, wh) as f64 / n - mu_a * mu_a;
            let var_b = sbb.window(x, y, ww, wh) as f64 / n - mu_b * mu_b;
            let cov = sab.window(x, y, ww, wh) as f64 / n - mu_a * mu_b;
            let num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            let den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Pairwise SSIM of the (reflectivity, signal, near-IR) images.
pub fn ssim_matrix(channels: [&ChannelImage; 3]) -> Result<[[f64; 3]; 3], LidarError> {
    let mut m = [[1.0; 3]; 3];
    for i in 0..3 {
        for j in (i + 1)..3 {
            let s = ssim(channels[i], channels[j])?;
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    Ok(m)
}

/// Channel-similarity matrix of a destaggered 8-bit frame, in the order
/// (reflectivity, signal, near-IR).
pub fn channel_ssim_matrix(frame: &LidarFrame) -> Result<[[f64; 3]; 3], LidarError> {
    if frame.staggered {
        return Err(LidarError::Precondition(
            "channel similarity needs a destaggered frame".into(),
        ));
    }
    let chans = [&frame.reflectivity, &frame.signal, &frame.near_ir];
    if let Some(c) = chans.iter().find(|c| c.bit_depth() != BitDepth::Eight) {
        return Err(LidarError::Precondition(format!(
            "{} channel must be 8-bit",
            c.kind()
        )));
    }
    ssim_matrix(chans)
}

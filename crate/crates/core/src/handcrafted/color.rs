use super::{check_mask, foreground, BlockKind, FeatureBlock};
use crate::error::{Error, Result};
use crate::raster::{rgb_to_hsv, ImageBuffer};
use crate::segmentation::Mask;

/// Mean, population std, skewness, kurtosis (m4/m2^2) and base-2 entropy
/// of the H, S and V channels over the foreground.
pub fn extract_color_basic(img: &ImageBuffer, mask: &Mask) -> Result<FeatureBlock> {
    check_mask(img, mask)?;
    let hsv: Vec<[u8; 3]> = foreground(mask).map(|(x, y)| rgb_to_hsv(img.pixel(x, y))).collect();
    if hsv.len() < 2 {
        return Err(Error::DegenerateInput("color moments need two foreground pixels".into()));
    }
    let n = hsv.len() as f64;
    let mut out = Vec::with_capacity(15);
    for c in 0..3 {
        let mut hist = [0u64; 256];
        let mut sum = 0.0;
        for p in &hsv {
            hist[p[c] as usize] += 1;
            sum += p[c] as f64;
        }
        let mean = sum / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for p in &hsv {
            let d = p[c] as f64 - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
        let std = m2.sqrt();
        let (skew, kurt) = if std > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2)) } else { (0.0, 0.0) };
        let entropy: f64 = hist
            .iter()
            .filter(|&&k| k > 0)
            .map(|&k| {
                let p = k as f64 / n;
                -p * p.log2()
            })
            .sum();
        out.extend([mean, std, skew, kurt, entropy]);
    }
    Ok(FeatureBlock::new(BlockKind::ColorBasic, out))
}

/// 8x8x8 joint histograms in HSV then BGR, each normalized to sum 1.
pub fn extract_color_hist(img: &ImageBuffer, mask: &Mask) -> Result<FeatureBlock> {
    check_mask(img, mask)?;
    let mut out = vec![0.0; 1024];
    let mut n = 0usize;
    for (x, y) in foreground(mask) {
        let rgb = img.pixel(x, y);
        let hsv = rgb_to_hsv(rgb);
        let h = (hsv[0] as usize * 8 / 180).min(7);
        let hsv_bin = (h * 8 + hsv[1] as usize / 32) * 8 + hsv[2] as usize / 32;
        let bgr_bin = ((rgb[2] as usize / 32) * 8 + rgb[1] as usize / 32) * 8 + rgb[0] as usize / 32;
        out[hsv_bin] += 1.0;
        out[512 + bgr_bin] += 1.0;
        n += 1;
    }
    if n == 0 {
        return Err(Error::DegenerateInput("color histogram needs a foreground pixel".into()));
    }
    out.iter_mut().for_each(|v| *v /= n as f64);
    Ok(FeatureBlock::new(BlockKind::ColorHist, out))
}

use super::{check_mask, BlockKind, FeatureBlock};
use crate::error::{Error, Result};
use crate::raster::{lerp, ImageBuffer};
use crate::segmentation::Mask;

pub const GLCM_LEVELS: usize = 32;
/// Distance-1 offsets (dx, dy) for 0, 45, 90 and 135 degrees, y pointing down.
pub const GLCM_OFFSETS: [(i64, i64); 4] = [(1, 0), (1, -1), (0, -1), (-1, -1)];

/// Symmetric normalized co-occurrence matrix over masked pixel pairs, or
/// `None` when no pair exists at this offset.
pub fn glcm_matrix(levels: &[u8], mask: &Mask, offset: (i64, i64)) -> Option<Vec<f64>> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut m = vec![0u64; GLCM_LEVELS * GLCM_LEVELS];
    let mut pairs = 0u64;
    for y in 0..h {
        for x in 0..w {
            let (nx, ny) = (x + offset.0, y + offset.1);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let (p, q) = ((y * w + x) as usize, (ny * w + nx) as usize);
            if mask.values()[p] == 0 || mask.values()[q] == 0 {
                continue;
            }
            let (i, j) = (levels[p] as usize, levels[q] as usize);
            m[i * GLCM_LEVELS + j] += 1;
            m[j * GLCM_LEVELS + i] += 1;
            pairs += 2;
        }
    }
    (pairs > 0).then(|| m.iter().map(|&c| c as f64 / pairs as f64).collect())
}

fn glcm_props(p: &[f64]) -> [f64; 5] {
    let l = GLCM_LEVELS;
    let (mut contrast, mut dissim, mut homog, mut asm) = (0.0, 0.0, 0.0, 0.0);
    let (mut mu_i, mut mu_j) = (0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            let v = p[i * l + j];
            let d = i as f64 - j as f64;
            contrast += v * d * d;
            dissim += v * d.abs();
            homog += v / (1.0 + d * d);
            asm += v * v;
            mu_i += i as f64 * v;
            mu_j += j as f64 * v;
        }
    }
    let (mut var_i, mut var_j, mut cov) = (0.0, 0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            let v = p[i * l + j];
            let (di, dj) = (i as f64 - mu_i, j as f64 - mu_j);
            var_i += v * di * di;
            var_j += v * dj * dj;
            cov += v * di * dj;
        }
    }
    let corr = if var_i > 1e-15 && var_j > 1e-15 { cov / (var_i * var_j).sqrt() } else { 0.0 };
    [contrast, dissim, homog, asm.sqrt(), corr]
}

/// Contrast, dissimilarity, homogeneity, energy and correlation at four angles.
pub fn extract_glcm(img: &ImageBuffer, mask: &Mask) -> Result<FeatureBlock> {
    check_mask(img, mask)?;
    let levels: Vec<u8> = img.gray_u8().iter().map(|g| g >> 3).collect();
    let mut values = Vec::with_capacity(20);
    let mut any = false;
    for off in GLCM_OFFSETS {
        match glcm_matrix(&levels, mask, off) {
            Some(m) => {
                any = true;
                values.extend(glcm_props(&m));
            }
            None => values.extend([0.0; 5]),
        }
    }
    if !any {
        return Err(Error::DegenerateInput("no masked pixel pairs for co-occurrence".into()));
    }
    Ok(FeatureBlock::new(BlockKind::Glcm, values))
}

fn lbp_offsets() -> [(f64, f64); 8] {
    let snap = |v: f64| (v * 1e9).round() / 1e9;
    std::array::from_fn(|p| {
        let a = 2.0 * std::f64::consts::PI * p as f64 / 8.0;
        (snap(a.cos()), snap(-a.sin()))
    })
}

/// Eight threshold bits (neighbour >= center) at radius 1, bilinearly sampled.
pub fn lbp_code(gray: &[f64], width: usize, x: usize, y: usize) -> [bool; 8] {
    let at = |xx: usize, yy: usize| gray[yy * width + xx];
    let center = at(x, y);
    let offs = lbp_offsets();
    std::array::from_fn(|p| {
        let (fx, fy) = (x as f64 + offs[p].0, y as f64 + offs[p].1);
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let x1 = if tx > 0.0 { x0 + 1 } else { x0 };
        let y1 = if ty > 0.0 { y0 + 1 } else { y0 };
        let top = lerp(at(x0, y0), at(x1, y0), tx);
        let bottom = lerp(at(x0, y1), at(x1, y1), tx);
        lerp(top, bottom, ty) >= center
    })
}

/// Rotation-invariant uniform class: the count of set bits for patterns
/// with at most two transitions, 9 otherwise.
pub fn lbp_class(bits: &[bool; 8]) -> usize {
    let transitions = (0..8).filter(|&i| bits[i] != bits[(i + 1) % 8]).count();
    if transitions <= 2 {
        bits.iter().filter(|&&b| b).count()
    } else {
        9
    }
}

/// 10-bin normalized histogram of uniform LBP classes over interior foreground pixels.
pub fn extract_lbp(img: &ImageBuffer, mask: &Mask) -> Result<FeatureBlock> {
    check_mask(img, mask)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray: Vec<f64> = img.gray_u8().iter().map(|&g| g as f64).collect();
    let mut hist = vec![0.0; 10];
    let mut n = 0usize;
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            if mask.get(x as u32, y as u32) {
                hist[lbp_class(&lbp_code(&gray, w, x, y))] += 1.0;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::DegenerateInput("no interior foreground pixels".into()));
    }
    hist.iter_mut().for_each(|v| *v /= n as f64);
    Ok(FeatureBlock::new(BlockKind::Lbp, hist))
}

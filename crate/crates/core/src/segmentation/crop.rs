use super::{CropBox, Mask};
use crate::raster::ImageBuffer;

#[derive(Debug, Clone, PartialEq)]
pub struct Crop {
    /// Cropped image with pixels outside the mask set to black.
    pub image: ImageBuffer,
    /// The segmentation mask restricted to `bbox`.
    pub mask: Mask,
    pub bbox: CropBox,
    /// Set when no component survived thresholding and the full image was kept.
    pub fallback: bool,
}

/// Otsu threshold of a 256-bin histogram: pixels `<= t` form the lower class.
/// Returns `None` when all mass sits in one bin.
pub fn otsu(hist: &[u64; 256]) -> Option<u8> {
    let total: u64 = hist.iter().sum();
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0u64, 0.0);
    let mut best: Option<(u8, f64)> = None;
    for t in 0..255 {
        w0 += hist[t];
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let m0 = sum0 / w0 as f64;
        let m1 = (sum_all - sum0) / w1 as f64;
        let between = w0 as f64 * w1 as f64 * (m0 - m1).powi(2);
        if best.is_none_or(|b| between > b.1) {
            best = Some((t as u8, between));
        }
    }
    best.map(|b| b.0)
}

/// Label 8-connected components of `on`; returns (labels, sizes) with
/// label 0 meaning off and component `k` stored as `k + 1`.
pub fn components(on: &[bool], w: usize, h: usize) -> (Vec<u32>, Vec<usize>) {
    let mut labels = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !on[start] || labels[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        labels[start] = id;
        stack.push(start);
        let mut size = 0;
        while let Some(p) = stack.pop() {
            size += 1;
            let (x, y) = ((p % w) as i64, (p / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let q = ny as usize * w + nx as usize;
                    if on[q] && labels[q] == 0 {
                        labels[q] = id;
                        stack.push(q);
                    }
                }
            }
        }
        sizes.push(size);
    }
    (labels, sizes)
}

/// Threshold the masked image with Otsu, keep the largest 8-connected
/// component and crop to its tight bounding box.
pub fn threshold_crop(img: &ImageBuffer, mask: &Mask) -> Crop {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray: Vec<u8> = img
        .pixels()
        .enumerate()
        .map(|(i, p)| if mask.values()[i] != 0 { crate::raster::luma(p).round().clamp(0.0, 255.0) as u8 } else { 0 })
        .collect();
    let mut hist = [0u64; 256];
    for &g in &gray {
        hist[g as usize] += 1;
    }
    let on: Vec<bool> = match otsu(&hist) {
        Some(t) => gray.iter().map(|&g| g > t).collect(),
        None => vec![false; w * h],
    };
    let (labels, sizes) = components(&on, w, h);
    // first-found component wins ties
    let largest = sizes.iter().enumerate().fold(None, |best: Option<(usize, usize)>, (k, &s)| match best {
        Some((_, bs)) if bs >= s => best,
        _ => Some((k, s)),
    });
    let full = CropBox { x: 0, y: 0, w: w as u32, h: h as u32 };
    let bbox = match largest {
        None => None,
        Some((k, _)) => {
            let id = k as u32 + 1;
            let (mut x0, mut y0, mut x1, mut y1) = (w, h, 0, 0);
            for (p, &l) in labels.iter().enumerate() {
                if l == id {
                    let (x, y) = (p % w, p / w);
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
            Some(CropBox { x: x0 as u32, y: y0 as u32, w: (x1 - x0 + 1) as u32, h: (y1 - y0 + 1) as u32 })
        }
    };
    let (bbox, fallback) = match bbox {
        Some(b) => (b, false),
        None => (full, true),
    };
    let sub_mask = mask.crop(&bbox);
    let mut image = img.crop(bbox.x, bbox.y, bbox.w, bbox.h);
    for y in 0..bbox.h {
        for x in 0..bbox.w {
            if !sub_mask.get(x, y) {
                image.put_pixel(x, y, [0, 0, 0]);
            }
        }
    }
    Crop { image, mask: sub_mask, bbox, fallback }
}

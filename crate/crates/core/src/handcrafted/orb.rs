use super::orb_pattern::{POS0, POS1};
use super::{check_mask, BlockKind, FeatureBlock};
use crate::error::Result;
use crate::raster::ImageBuffer;
use crate::segmentation::Mask;

pub const FAST_THRESHOLD: i32 = 20;
pub const MAX_KEYPOINTS: usize = 500;
/// Keypoints closer than this to the border are dropped so the rotated
/// pattern and the orientation patch stay inside the image.
pub const BORDER: usize = 19;
const PATCH_RADIUS: i64 = 15;
const HARRIS_K: f64 = 0.04;
const HARRIS_BLOCK: i64 = 3;

/// Bresenham circle of radius 3, clockwise from the top.
const CIRCLE: [(i64, i64); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbKeypoint {
    pub x: usize,
    pub y: usize,
    pub harris: f64,
    /// Radians, from the intensity centroid.
    pub angle: f64,
}

struct Plane<'a> {
    w: usize,
    v: &'a [u8],
}

impl Plane<'_> {
    fn at(&self, x: i64, y: i64) -> i32 {
        self.v[y as usize * self.w + x as usize] as i32
    }
}

/// FAST-9 score: summed excess over the threshold of the brighter or darker
/// set, or 0 when no 9-pixel contiguous arc exists.
fn fast_score(p: &Plane, x: i64, y: i64) -> i32 {
    let c = p.at(x, y);
    let ring: [i32; 16] = std::array::from_fn(|i| p.at(x + CIRCLE[i].0, y + CIRCLE[i].1));
    let mut best = 0;
    for sign in [1, -1] {
        let mut run = 0;
        let mut max_run = 0;
        for i in 0..32 {
            if sign * (ring[i % 16] - c) > FAST_THRESHOLD {
                run += 1;
                max_run = max_run.max(run);
            } else {
                run = 0;
            }
        }
        if max_run >= 9 {
            let s: i32 = ring.iter().map(|&r| (sign * (r - c) - FAST_THRESHOLD).max(0)).sum();
            best = best.max(s);
        }
    }
    best
}

fn harris(p: &Plane, x: i64, y: i64) -> f64 {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for dy in -HARRIS_BLOCK..=HARRIS_BLOCK {
        for dx in -HARRIS_BLOCK..=HARRIS_BLOCK {
            let (u, v) = (x + dx, y + dy);
            let ix = (p.at(u + 1, v - 1) + 2 * p.at(u + 1, v) + p.at(u + 1, v + 1)
                - p.at(u - 1, v - 1)
                - 2 * p.at(u - 1, v)
                - p.at(u - 1, v + 1)) as f64;
            let iy = (p.at(u - 1, v + 1) + 2 * p.at(u, v + 1) + p.at(u + 1, v + 1)
                - p.at(u - 1, v - 1)
                - 2 * p.at(u, v - 1)
                - p.at(u + 1, v - 1)) as f64;
            a += ix * ix;
            b += iy * iy;
            c += ix * iy;
        }
    }
    a * b - c * c - HARRIS_K * (a + b) * (a + b)
}

fn centroid_angle(p: &Plane, x: i64, y: i64) -> f64 {
    let (mut m01, mut m10) = (0.0, 0.0);
    for dy in -PATCH_RADIUS..=PATCH_RADIUS {
        for dx in -PATCH_RADIUS..=PATCH_RADIUS {
            if dx * dx + dy * dy <= PATCH_RADIUS * PATCH_RADIUS {
                let v = p.at(x + dx, y + dy) as f64;
                m10 += dx as f64 * v;
                m01 += dy as f64 * v;
            }
        }
    }
    m01.atan2(m10)
}

fn gaussian_smooth(v: &[u8], w: usize, h: usize) -> Vec<f64> {
    let sigma: f64 = 2.0;
    let r = 3i64;
    let mut k: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|x| *x /= s);
    let clamp = |i: i64, n: usize| i.clamp(0, n as i64 - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] =
                (-r..=r).map(|i| k[(i + r) as usize] * v[y * w + clamp(x as i64 + i, w)] as f64).sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = (-r..=r).map(|i| k[(i + r) as usize] * tmp[clamp(y as i64 + i, h) * w + x]).sum();
        }
    }
    out
}

/// FAST-9 corners inside the mask after 3x3 non-maximum suppression, ranked
/// by Harris response and truncated to [`MAX_KEYPOINTS`].
pub fn orb_keypoints(gray: &[u8], w: usize, h: usize, mask: &Mask) -> Vec<OrbKeypoint> {
    if w <= 2 * BORDER || h <= 2 * BORDER {
        return Vec::new();
    }
    let p = Plane { w, v: gray };
    let mut score = vec![0i32; w * h];
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            score[y * w + x] = fast_score(&p, x as i64, y as i64);
        }
    }
    let mut kps = Vec::new();
    for y in BORDER..h - BORDER {
        for x in BORDER..w - BORDER {
            let s = score[y * w + x];
            if s == 0 || !mask.get(x as u32, y as u32) {
                continue;
            }
            let mut keep = true;
            'nms: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let q = (y as i64 + dy) as usize * w + (x as i64 + dx) as usize;
                    let earlier = dy < 0 || (dy == 0 && dx < 0);
                    if score[q] > s || (earlier && score[q] == s) {
                        keep = false;
                        break 'nms;
                    }
                }
            }
            if keep {
                let (xi, yi) = (x as i64, y as i64);
                kps.push(OrbKeypoint { x, y, harris: harris(&p, xi, yi), angle: centroid_angle(&p, xi, yi) });
            }
        }
    }
    // stable sort keeps raster order among equal responses
    kps.sort_by(|a, b| b.harris.total_cmp(&a.harris));
    kps.truncate(MAX_KEYPOINTS);
    kps
}

fn describe(smooth: &[f64], w: usize, kp: &OrbKeypoint) -> [u8; 32] {
    let (s, c) = kp.angle.sin_cos();
    let at = |pt: [i8; 2]| {
        let (px, py) = (pt[0] as f64, pt[1] as f64);
        let rx = (px * c - py * s).round() as i64;
        let ry = (px * s + py * c).round() as i64;
        smooth[(kp.y as i64 + ry) as usize * w + (kp.x as i64 + rx) as usize]
    };
    let mut d = [0u8; 32];
    for (i, (a, b)) in POS0.iter().zip(POS1.iter()).enumerate() {
        if at(*a) < at(*b) {
            d[i / 8] |= 1 << (i % 8);
        }
    }
    d
}

/// Per-byte mean of the steered BRIEF descriptors; zeros and flagged when
/// no keypoint is found.
pub fn extract_orb(img: &ImageBuffer, mask: &Mask) -> Result<FeatureBlock> {
    check_mask(img, mask)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = img.gray_u8();
    let kps = orb_keypoints(&gray, w, h, mask);
    if kps.is_empty() {
        return Ok(FeatureBlock::zeros(BlockKind::Orb));
    }
    let smooth = gaussian_smooth(&gray, w, h);
    let mut sum = vec![0.0; 32];
    for kp in &kps {
        for (s, b) in sum.iter_mut().zip(describe(&smooth, w, kp)) {
            *s += b as f64;
        }
    }
    sum.iter_mut().for_each(|v| *v /= kps.len() as f64);
    Ok(FeatureBlock::new(BlockKind::Orb, sum))
}

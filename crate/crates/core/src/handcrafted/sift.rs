//! Difference-of-Gaussians keypoints with 4x4x8 gradient-histogram
//! descriptors. Angles follow a y-up convention: a gradient pointing to
//! the top of the image has orientation 90 degrees.

use super::{check_mask, BlockKind, FeatureBlock};
use crate::error::Result;
use crate::raster::ImageBuffer;
use crate::segmentation::Mask;

pub const OCTAVES: usize = 3;
pub const SCALES: usize = 3;
pub const SIGMA0: f64 = 1.6;
pub const CONTRAST: f64 = 0.04;
pub const EDGE_RATIO: f64 = 10.0;
const INIT_SIGMA: f64 = 0.5;
const IMG_BORDER: usize = 5;
const MAX_INTERP: usize = 5;
const ORI_BINS: usize = 36;
const ORI_PEAK: f64 = 0.8;
const DESC_WIDTH: usize = 4;
const DESC_BINS: usize = 8;
const MAG_CLAMP: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftKeypoint {
    pub octave: usize,
    pub layer: usize,
    /// Integer location in octave pixels.
    pub col: usize,
    pub row: usize,
    /// Sub-pixel location in input-image pixels.
    pub x: f64,
    pub y: f64,
    /// Scale relative to the octave.
    pub sigma: f64,
    /// Dominant gradient orientation in degrees, y-up.
    pub angle: f64,
}

struct Layer {
    w: usize,
    h: usize,
    v: Vec<f64>,
}

impl Layer {
    fn at(&self, x: usize, y: usize) -> f64 {
        self.v[y * self.w + x]
    }
}

fn reflect101(i: i64, n: usize) -> usize {
    let n = n as i64;
    if n == 1 {
        return 0;
    }
    let mut i = i;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * n - 2 - i;
        } else {
            return i as usize;
        }
    }
}

fn blur(src: &Layer, sigma: f64) -> Layer {
    let r = (4.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    let (w, h) = (src.w, src.h);
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for i in -r..=r {
                acc += k[(i + r) as usize] * src.v[y * w + reflect101(x as i64 + i, w)];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for i in -r..=r {
                acc += k[(i + r) as usize] * tmp[reflect101(y as i64 + i, h) * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    Layer { w, h, v: out }
}

fn downsample(src: &Layer) -> Layer {
    let (w, h) = (src.w.div_ceil(2), src.h.div_ceil(2));
    let mut v = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            v.push(src.at(2 * x, 2 * y));
        }
    }
    Layer { w, h, v }
}

struct Octave {
    gauss: Vec<Layer>,
    dog: Vec<Layer>,
}

fn pyramid(gray: &[f64], w: usize, h: usize) -> Vec<Octave> {
    let k = 2f64.powf(1.0 / SCALES as f64);
    let mut sig = vec![SIGMA0];
    for i in 1..SCALES + 3 {
        let prev = SIGMA0 * k.powi(i as i32 - 1);
        let total = prev * k;
        sig.push((total * total - prev * prev).sqrt());
    }
    let base = blur(&Layer { w, h, v: gray.to_vec() }, (SIGMA0 * SIGMA0 - INIT_SIGMA * INIT_SIGMA).sqrt());
    let mut octaves: Vec<Octave> = Vec::new();
    for o in 0..OCTAVES {
        let first = if o == 0 { Layer { w, h, v: base.v.clone() } } else { downsample(&octaves[o - 1].gauss[SCALES]) };
        if first.w < 2 * IMG_BORDER + 3 || first.h < 2 * IMG_BORDER + 3 {
            break;
        }
        let mut gauss = vec![first];
        for s in sig.iter().skip(1) {
            let next = blur(gauss.last().unwrap(), *s);
            gauss.push(next);
        }
        let dog = gauss
            .windows(2)
            .map(|p| Layer { w: p[0].w, h: p[0].h, v: p[1].v.iter().zip(&p[0].v).map(|(a, b)| a - b).collect() })
            .collect();
        octaves.push(Octave { gauss, dog });
    }
    octaves
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let col = |j: usize| {
        let mut t = m;
        for i in 0..3 {
            t[i][j] = b[i];
        }
        t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1]) - t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0])
            + t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0])
    };
    Some([col(0) / det, col(1) / det, col(2) / det])
}

/// Sub-pixel refinement plus contrast and edge rejection.
fn refine(oct: &Octave, mut layer: usize, mut r: usize, mut c: usize) -> Option<(usize, usize, usize, [f64; 3], f64)> {
    let (w, h) = (oct.dog[0].w, oct.dog[0].h);
    let mut x = [0.0; 3];
    let mut converged = false;
    for _ in 0..MAX_INTERP {
        let (p, cur, n) = (&oct.dog[layer - 1], &oct.dog[layer], &oct.dog[layer + 1]);
        let v2 = cur.at(c, r) * 2.0;
        let d = [
            (cur.at(c + 1, r) - cur.at(c - 1, r)) * 0.5,
            (cur.at(c, r + 1) - cur.at(c, r - 1)) * 0.5,
            (n.at(c, r) - p.at(c, r)) * 0.5,
        ];
        let dxx = cur.at(c + 1, r) + cur.at(c - 1, r) - v2;
        let dyy = cur.at(c, r + 1) + cur.at(c, r - 1) - v2;
        let dss = n.at(c, r) + p.at(c, r) - v2;
        let dxy = (cur.at(c + 1, r + 1) - cur.at(c - 1, r + 1) - cur.at(c + 1, r - 1) + cur.at(c - 1, r - 1)) * 0.25;
        let dxs = (n.at(c + 1, r) - n.at(c - 1, r) - p.at(c + 1, r) + p.at(c - 1, r)) * 0.25;
        let dys = (n.at(c, r + 1) - n.at(c, r - 1) - p.at(c, r + 1) + p.at(c, r - 1)) * 0.25;
        let hm = [[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]];
        let sol = solve3(hm, d)?;
        x = [-sol[0], -sol[1], -sol[2]];
        if x.iter().all(|v| v.abs() < 0.5) {
            converged = true;
            break;
        }
        if x.iter().any(|v| v.abs() > 1e6) {
            return None;
        }
        let nc = c as i64 + x[0].round() as i64;
        let nr = r as i64 + x[1].round() as i64;
        let nl = layer as i64 + x[2].round() as i64;
        if nl < 1
            || nl > SCALES as i64
            || nc < IMG_BORDER as i64
            || nc >= (w - IMG_BORDER) as i64
            || nr < IMG_BORDER as i64
            || nr >= (h - IMG_BORDER) as i64
        {
            return None;
        }
        c = nc as usize;
        r = nr as usize;
        layer = nl as usize;
    }
    if !converged {
        return None;
    }
    let (p, cur, n) = (&oct.dog[layer - 1], &oct.dog[layer], &oct.dog[layer + 1]);
    let d = [
        (cur.at(c + 1, r) - cur.at(c - 1, r)) * 0.5,
        (cur.at(c, r + 1) - cur.at(c, r - 1)) * 0.5,
        (n.at(c, r) - p.at(c, r)) * 0.5,
    ];
    let contrast = cur.at(c, r) + 0.5 * (d[0] * x[0] + d[1] * x[1] + d[2] * x[2]);
    if contrast.abs() * (SCALES as f64) < CONTRAST {
        return None;
    }
    let v2 = cur.at(c, r) * 2.0;
    let dxx = cur.at(c + 1, r) + cur.at(c - 1, r) - v2;
    let dyy = cur.at(c, r + 1) + cur.at(c, r - 1) - v2;
    let dxy = (cur.at(c + 1, r + 1) - cur.at(c - 1, r + 1) - cur.at(c + 1, r - 1) + cur.at(c - 1, r - 1)) * 0.25;
    let tr = dxx + dyy;
    let det = dxx * dyy - dxy * dxy;
    if det <= 0.0 || tr * tr * EDGE_RATIO >= (EDGE_RATIO + 1.0).powi(2) * det {
        return None;
    }
    Some((layer, r, c, x, contrast))
}

/// Gradient at an interior pixel as (magnitude, y-up angle in degrees).
fn gradient(img: &Layer, x: usize, y: usize) -> (f64, f64) {
    let dx = img.at(x + 1, y) - img.at(x - 1, y);
    let dy = img.at(x, y - 1) - img.at(x, y + 1);
    let mut a = dy.atan2(dx).to_degrees();
    if a < 0.0 {
        a += 360.0;
    }
    ((dx * dx + dy * dy).sqrt(), a)
}

fn orientations(img: &Layer, r: usize, c: usize, sigma: f64) -> Vec<f64> {
    let radius = (3.0 * 1.5 * sigma).round() as i64;
    let wsig = 1.5 * sigma;
    let mut hist = [0.0f64; ORI_BINS];
    for i in -radius..=radius {
        let y = r as i64 + i;
        if y <= 0 || y >= img.h as i64 - 1 {
            continue;
        }
        for j in -radius..=radius {
            let x = c as i64 + j;
            if x <= 0 || x >= img.w as i64 - 1 {
                continue;
            }
            let (mag, ang) = gradient(img, x as usize, y as usize);
            let wgt = (-((i * i + j * j) as f64) / (2.0 * wsig * wsig)).exp();
            let b = ang * ORI_BINS as f64 / 360.0;
            let b0 = b.floor();
            let frac = b - b0;
            let b0 = (b0 as i64).rem_euclid(ORI_BINS as i64) as usize;
            hist[b0] += (1.0 - frac) * wgt * mag;
            hist[(b0 + 1) % ORI_BINS] += frac * wgt * mag;
        }
    }
    let n = ORI_BINS;
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            (hist[(i + n - 2) % n] + hist[(i + 2) % n]) / 16.0
                + (hist[(i + n - 1) % n] + hist[(i + 1) % n]) * 4.0 / 16.0
                + hist[i] * 6.0 / 16.0
        })
        .collect();
    let max = smooth.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    // bins within rounding noise count as equal; a two-bin plateau yields
    // one peak at its left bin
    let tol = max * 1e-9;
    let mut out = Vec::new();
    for i in 0..n {
        let (l, v, rr) = (smooth[(i + n - 1) % n], smooth[i], smooth[(i + 1) % n]);
        if v > l + tol && v >= rr - tol && v >= ORI_PEAK * max - tol {
            let off = 0.5 * (l - rr) / (l - 2.0 * v + rr);
            let bin = (i as f64 + off).rem_euclid(n as f64);
            out.push(bin * 360.0 / n as f64);
        }
    }
    out
}

fn descriptor(img: &Layer, r: usize, c: usize, angle: f64, sigma: f64) -> [f64; 128] {
    let d = DESC_WIDTH as f64;
    let n = DESC_BINS;
    let bins_per_deg = n as f64 / 360.0;
    let exp_scale = -1.0 / (d * d * 0.5);
    let hist_width = 3.0 * sigma;
    let diag = ((img.w * img.w + img.h * img.h) as f64).sqrt();
    let radius = (hist_width * std::f64::consts::SQRT_2 * (d + 1.0) * 0.5).round().min(diag) as i64;
    let (sin_t, cos_t) = angle.to_radians().sin_cos();
    let (sin_t, cos_t) = (sin_t / hist_width, cos_t / hist_width);
    let side = DESC_WIDTH + 2;
    let mut hist = vec![0.0; side * side * (n + 2)];
    for i in -radius..=radius {
        for j in -radius..=radius {
            let c_rot = j as f64 * cos_t - i as f64 * sin_t;
            let r_rot = j as f64 * sin_t + i as f64 * cos_t;
            let rbin = r_rot + d / 2.0 - 0.5;
            let cbin = c_rot + d / 2.0 - 0.5;
            let (y, x) = (r as i64 + i, c as i64 + j);
            if !(rbin > -1.0 && rbin < d && cbin > -1.0 && cbin < d) {
                continue;
            }
            if y <= 0 || y >= img.h as i64 - 1 || x <= 0 || x >= img.w as i64 - 1 {
                continue;
            }
            let (mag, ang) = gradient(img, x as usize, y as usize);
            let wgt = ((c_rot * c_rot + r_rot * r_rot) * exp_scale).exp();
            let obin = (ang - angle) * bins_per_deg;
            let mag = mag * wgt;
            let (r0, c0, o0) = (rbin.floor(), cbin.floor(), obin.floor());
            let (fr, fc, fo) = (rbin - r0, cbin - c0, obin - o0);
            let o0 = (o0 as i64).rem_euclid(n as i64) as usize;
            let (r0, c0) = ((r0 as i64 + 1) as usize, (c0 as i64 + 1) as usize);
            for (dr, wr) in [(0, 1.0 - fr), (1, fr)] {
                for (dc, wc) in [(0, 1.0 - fc), (1, fc)] {
                    for (dob, wo) in [(0, 1.0 - fo), (1, fo)] {
                        let idx = ((r0 + dr) * side + c0 + dc) * (n + 2) + o0 + dob;
                        hist[idx] += mag * wr * wc * wo;
                    }
                }
            }
        }
    }
    let mut out = [0.0; 128];
    for i in 0..DESC_WIDTH {
        for j in 0..DESC_WIDTH {
            let base = ((i + 1) * side + j + 1) * (n + 2);
            for k in 0..n {
                let mut v = hist[base + k];
                if k < 2 {
                    v += hist[base + n + k];
                }
                out[(i * DESC_WIDTH + j) * n + k] = v;
            }
        }
    }
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    let thr = norm * MAG_CLAMP;
    out.iter_mut().for_each(|v| *v = v.min(thr));
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::EPSILON);
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// Keypoints and unit-norm descriptors for a grayscale image in [0, 1];
/// keypoints falling outside the mask are dropped.
pub fn sift_descriptors(gray: &[f64], w: usize, h: usize, mask: &Mask) -> Vec<(SiftKeypoint, [f64; 128])> {
    let octaves = pyramid(gray, w, h);
    let thr = 0.5 * CONTRAST / SCALES as f64;
    let mut out = Vec::new();
    for (o, oct) in octaves.iter().enumerate() {
        let (ow, oh) = (oct.dog[0].w, oct.dog[0].h);
        let scale = (1usize << o) as f64;
        for layer in 1..=SCALES {
            let (p, cur, n) = (&oct.dog[layer - 1], &oct.dog[layer], &oct.dog[layer + 1]);
            for r in IMG_BORDER..oh - IMG_BORDER {
                for c in IMG_BORDER..ow - IMG_BORDER {
                    let v = cur.at(c, r);
                    if v.abs() <= thr {
                        continue;
                    }
                    let mut is_max = v > 0.0;
                    let mut is_min = v < 0.0;
                    'scan: for img in [p, cur, n] {
                        for dy in 0..3 {
                            for dx in 0..3 {
                                let u = img.at(c + dx - 1, r + dy - 1);
                                is_max &= v >= u;
                                is_min &= v <= u;
                                if !is_max && !is_min {
                                    break 'scan;
                                }
                            }
                        }
                    }
                    if !is_max && !is_min {
                        continue;
                    }
                    let Some((kl, kr, kc, x, _)) = refine(oct, layer, r, c) else { continue };
                    let sigma = SIGMA0 * 2f64.powf((kl as f64 + x[2]) / SCALES as f64);
                    let (fx, fy) = ((kc as f64 + x[0]) * scale, (kr as f64 + x[1]) * scale);
                    let (mx, my) = (fx.round().clamp(0.0, w as f64 - 1.0), fy.round().clamp(0.0, h as f64 - 1.0));
                    if !mask.get(mx as u32, my as u32) {
                        continue;
                    }
                    let g = &oct.gauss[kl];
                    for angle in orientations(g, kr, kc, sigma) {
                        let kp = SiftKeypoint { octave: o, layer: kl, col: kc, row: kr, x: fx, y: fy, sigma, angle };
                        out.push((kp, descriptor(g, kr, kc, angle, sigma)));
                    }
                }
            }
        }
    }
    out
}

/// Element-wise mean of the descriptors; zeros and flagged when none survive.
pub fn extract_sift(img: &ImageBuffer, mask: &Mask) -> Result<FeatureBlock> {
    check_mask(img, mask)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray: Vec<f64> = img.gray().iter().map(|g| g / 255.0).collect();
    let desc = sift_descriptors(&gray, w, h, mask);
    if desc.is_empty() {
        return Ok(FeatureBlock::zeros(BlockKind::Sift));
    }
    let mut sum = vec![0.0; 128];
    for (_, d) in &desc {
        for (s, v) in sum.iter_mut().zip(d) {
            *s += v;
        }
    }
    sum.iter_mut().for_each(|v| *v /= desc.len() as f64);
    Ok(FeatureBlock::new(BlockKind::Sift, sum))
}

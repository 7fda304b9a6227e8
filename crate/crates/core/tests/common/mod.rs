//! Naive reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wastebench::raster::rgb_to_hsv;
use wastebench::segmentation::Mask;
use wastebench::ImageBuffer;

pub fn noise(w: u32, h: u32, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageBuffer::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random()])
}

/// Gray noise on 16 levels, so bilinear comparisons stay clear of ties.
pub fn coarse_gray(w: u32, h: u32, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageBuffer::from_fn(w, h, |_, _| {
        let v = rng.random_range(0..16u8) * 16;
        [v, v, v]
    })
}

pub fn full(img: &ImageBuffer) -> Mask {
    Mask::full(img.width(), img.height())
}

fn masked_pixels(img: &ImageBuffer, mask: &Mask) -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if mask.get(x, y) {
                out.push(img.pixel(x, y));
            }
        }
    }
    out
}

/// Per HSV channel: mean, std, skewness, kurtosis and entropy in bits.
pub fn naive_color_basic(img: &ImageBuffer, mask: &Mask) -> Vec<f64> {
    let px = masked_pixels(img, mask);
    let mut out = Vec::new();
    for c in 0..3 {
        let vals: Vec<f64> = px.iter().map(|&p| rgb_to_hsv(p)[c] as f64).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = var.sqrt();
        let skew = vals.iter().map(|v| ((v - mean) / sd).powi(3)).sum::<f64>() / n;
        let kurt = vals.iter().map(|v| ((v - mean) / sd).powi(4)).sum::<f64>() / n;
        let mut counts: HashMap<u64, f64> = HashMap::new();
        for v in &vals {
            *counts.entry(*v as u64).or_default() += 1.0;
        }
        let entropy = counts.values().map(|k| -(k / n) * (k / n).log2()).sum::<f64>();
        out.extend([mean, sd, skew, kurt, entropy]);
    }
    out
}

/// HSV then BGR 8x8x8 histograms, each normalized.
pub fn naive_color_hist(img: &ImageBuffer, mask: &Mask) -> Vec<f64> {
    let px = masked_pixels(img, mask);
    let mut hsv = vec![0.0; 512];
    let mut bgr = vec![0.0; 512];
    for &p in &px {
        let q = rgb_to_hsv(p);
        let hb = ((q[0] as f64 / 180.0 * 8.0).floor() as usize).min(7);
        hsv[hb * 64 + (q[1] as usize >> 5) * 8 + (q[2] as usize >> 5)] += 1.0;
        bgr[(p[2] as usize >> 5) * 64 + (p[1] as usize >> 5) * 8 + (p[0] as usize >> 5)] += 1.0;
    }
    let n = px.len() as f64;
    hsv.into_iter().chain(bgr).map(|v| v / n).collect()
}

/// Contrast, dissimilarity, homogeneity, energy and correlation at 0, 45,
/// 90 and 135 degrees, from an explicit list of symmetric level pairs.
pub fn naive_glcm(img: &ImageBuffer, mask: &Mask) -> Vec<f64> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let levels: Vec<f64> = img.gray_u8().iter().map(|g| (g / 8) as f64).collect();
    let mut out = Vec::new();
    for off in [(1i64, 0i64), (1, -1), (0, -1), (-1, -1)] {
        let mut pairs = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let (nx, ny) = (x + off.0, y + off.1);
                if !(0..w).contains(&nx) || !(0..h).contains(&ny) {
                    continue;
                }
                if mask.get(x as u32, y as u32) && mask.get(nx as u32, ny as u32) {
                    let (i, j) = (levels[(y * w + x) as usize], levels[(ny * w + nx) as usize]);
                    pairs.push((i, j));
                    pairs.push((j, i));
                }
            }
        }
        let n = pairs.len() as f64;
        let contrast = pairs.iter().map(|(i, j)| (i - j).powi(2)).sum::<f64>() / n;
        let dissim = pairs.iter().map(|(i, j)| (i - j).abs()).sum::<f64>() / n;
        let homog = pairs.iter().map(|(i, j)| 1.0 / (1.0 + (i - j).powi(2))).sum::<f64>() / n;
        let mut cells: HashMap<(u64, u64), f64> = HashMap::new();
        for (i, j) in &pairs {
            *cells.entry((*i as u64, *j as u64)).or_default() += 1.0;
        }
        let energy = cells.values().map(|c| (c / n).powi(2)).sum::<f64>().sqrt();
        let mi = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let var = pairs.iter().map(|p| (p.0 - mi).powi(2)).sum::<f64>() / n;
        let corr = if var > 1e-15 { pairs.iter().map(|(i, j)| (i - mi) * (j - mi)).sum::<f64>() / n / var } else { 0.0 };
        out.extend([contrast, dissim, homog, energy, corr]);
    }
    out
}

/// LBP class counts and the number of interior foreground pixels. Samples
/// the eight neighbours at exact angles with explicit bilinear weights and
/// classifies by rotation.
pub fn naive_lbp(img: &ImageBuffer, mask: &Mask) -> (Vec<u64>, u64) {
    let g: Vec<f64> = img.gray_u8().iter().map(|&v| v as f64).collect();
    let w = img.width() as usize;
    let h = img.height() as usize;
    let px = |x: usize, y: usize| g[y * w + x];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let offs = [(1.0, 0.0), (r, -r), (0.0, -1.0), (-r, -r), (-1.0, 0.0), (-r, r), (0.0, 1.0), (r, r)];
    let mut hist = vec![0u64; 10];
    let mut n = 0;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            if !mask.get(x as u32, y as u32) {
                continue;
            }
            let c = px(x, y);
            let mut bits = [0u8; 8];
            for (k, (dx, dy)) in offs.iter().enumerate() {
                let (fx, fy): (f64, f64) = (x as f64 + dx, y as f64 + dy);
                let (x0, y0) = (fx.floor(), fy.floor());
                let (ax, ay) = (fx - x0, fy - y0);
                let (x0, y0) = (x0 as usize, y0 as usize);
                let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
                let v = px(x0, y0) * (1.0 - ax) * (1.0 - ay)
                    + px(x1, y0) * ax * (1.0 - ay)
                    + px(x0, y1) * (1.0 - ax) * ay
                    + px(x1, y1) * ax * ay;
                bits[k] = (v >= c - 1e-9) as u8;
            }
            let ones = bits.iter().map(|&b| b as usize).sum::<usize>();
            // uniform iff some rotation is a run of ones followed by zeros
            let uniform = (0..8).any(|s| {
                let rot: Vec<u8> = (0..8).map(|i| bits[(i + s) % 8]).collect();
                rot.iter().take(ones).all(|&b| b == 1) && rot.iter().skip(ones).all(|&b| b == 0)
            });
            hist[if uniform { ones } else { 9 }] += 1;
            n += 1;
        }
    }
    (hist, n)
}

/// An asymmetric shape so that no Hu invariant is near zero. `variant`
/// reshapes body, knob and tail.
pub fn blob(w: u32, h: u32, ox: f64, oy: f64, s: f64, variant: u32) -> (ImageBuffer, Mask) {
    let v = variant as f64;
    let (a, b) = (30.0 + 2.0 * v, 18.0 + v);
    let knob_r2 = (10.0 - 0.5 * v).powi(2);
    let inside = |x: f64, y: f64| {
        let (u, t) = ((x - ox) / s, (y - oy) / s);
        let body = (u / a).powi(2) + (t / b).powi(2) <= 1.0;
        let knob = (u - 26.0 - v).powi(2) + (t + 14.0).powi(2) <= knob_r2;
        let tail = (-(40.0 + v)..-20.0).contains(&u) && (0.0..6.0 + 0.5 * v).contains(&t);
        body || knob || tail
    };
    let m = Mask::from_fn(w, h, |x, y| inside(x as f64 + 0.5, y as f64 + 0.5));
    let img = ImageBuffer::from_fn(w, h, |x, y| {
        if m.get(x, y) {
            let g = (120.0 + (x as f64 - ox) / s * 2.0).clamp(0.0, 255.0) as u8;
            [g, g, g]
        } else {
            [0, 0, 0]
        }
    });
    (img, m)
}

/// Write `x` as a feature file plus labels sidecar with fixed splits:
/// per class, the first `train` rows go to training, the next `val` to
/// validation and the rest to test.
pub fn write_feature_set(
    dir: &std::path::Path,
    x: &wastebench::Matrix,
    labels: &[usize],
    train: usize,
    val: usize,
) -> (std::path::PathBuf, std::path::PathBuf) {
    use wastebench::dataset::Split;
    use wastebench::deepfeat::{write_labels, write_matrix, FeatureMatrix};
    let ids: Vec<String> = (0..x.rows()).map(|i| format!("img{i:05}")).collect();
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let splits: Vec<Split> = labels
        .iter()
        .map(|&l| {
            let pos = seen.entry(l).or_insert(0);
            *pos += 1;
            match *pos {
                p if p <= train => Split::Train,
                p if p <= train + val => Split::Val,
                _ => Split::Test,
            }
        })
        .collect();
    let features = dir.join("features.fmx");
    let sidecar = dir.join("features.labels.csv");
    write_matrix(&FeatureMatrix::from_matrix(x, "resnet50_gap", ids.clone()).unwrap(), &features).unwrap();
    write_labels(&ids, labels, &splits, &sidecar).unwrap();
    (features, sidecar)
}

/// k nearest by full sort of (distance, index), majority vote with ties to
/// the lowest class.
pub fn brute_force_knn(train: &wastebench::Matrix, labels: &[usize], q: &[f64], k: usize, c: usize) -> usize {
    let mut d: Vec<(f64, usize)> = (0..train.rows())
        .map(|i| (train.row(i).iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), i))
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes = vec![0usize; c];
    for &(_, i) in d.iter().take(k) {
        votes[labels[i]] += 1;
    }
    let best = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == best).unwrap()
}

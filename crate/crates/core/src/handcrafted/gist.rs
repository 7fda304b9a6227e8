use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{check_mask, BlockKind, FeatureBlock};
use crate::error::{Error, Result};
use crate::raster::ImageBuffer;
use crate::segmentation::Mask;

pub const ORIENTATIONS: [f64; 4] = [0.0, 45.0, 90.0, 135.0];
pub const WAVELENGTH: f64 = 8.0;
pub const SIGMA: f64 = 4.0;
pub const ASPECT: f64 = 0.5;
pub const HALF: usize = 24;
pub const GRID: usize = 4;

/// Square complex kernel of side `2 * HALF + 1`, row-major.
#[derive(Debug, Clone)]
pub struct GaborKernel {
    pub side: usize,
    pub taps: Vec<Complex64>,
}

/// Complex Gabor filter with a zero-mean real part and unit L2 norm.
pub fn gabor_kernel(theta_deg: f64) -> GaborKernel {
    let side = 2 * HALF + 1;
    let (s, c) = theta_deg.to_radians().sin_cos();
    let mut taps = Vec::with_capacity(side * side);
    for v in 0..side {
        for u in 0..side {
            let (x, y) = (u as f64 - HALF as f64, v as f64 - HALF as f64);
            let xr = x * c + y * s;
            let yr = -x * s + y * c;
            let env = (-(xr * xr + ASPECT * ASPECT * yr * yr) / (2.0 * SIGMA * SIGMA)).exp();
            let phase = 2.0 * std::f64::consts::PI * xr / WAVELENGTH;
            taps.push(Complex64::new(env * phase.cos(), env * phase.sin()));
        }
    }
    let mean_re = taps.iter().map(|t| t.re).sum::<f64>() / taps.len() as f64;
    let mean_im = taps.iter().map(|t| t.im).sum::<f64>() / taps.len() as f64;
    for t in taps.iter_mut() {
        t.re -= mean_re;
        t.im -= mean_im;
    }
    let norm = taps.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|t| *t /= norm);
    GaborKernel { side, taps }
}

fn fft2(data: &mut [Complex64], w: usize, h: usize, planner: &mut FftPlanner<f64>, inverse: bool) {
    let row = if inverse { planner.plan_fft_inverse(w) } else { planner.plan_fft_forward(w) };
    for r in data.chunks_mut(w) {
        row.process(r);
    }
    let col = if inverse { planner.plan_fft_inverse(h) } else { planner.plan_fft_forward(h) };
    let mut buf = vec![Complex64::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            buf[y] = data[y * w + x];
        }
        col.process(&mut buf);
        for y in 0..h {
            data[y * w + x] = buf[y];
        }
    }
}

/// Mean response magnitude per grid cell, computed as
/// `R(x, y) = sum k(u, v) I(x - u, y - v)` with edge replication.
pub fn extract_gist(img: &ImageBuffer, mask: &Mask) -> Result<FeatureBlock> {
    check_mask(img, mask)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w < GRID || h < GRID {
        return Err(Error::DegenerateInput(format!("gist needs at least {GRID}x{GRID} pixels")));
    }
    let gray: Vec<f64> = img.gray().iter().map(|g| g / 255.0).collect();
    let k = 2 * HALF + 1;
    let (fw, fh) = (w + 2 * HALF + k - 1, h + 2 * HALF + k - 1);
    let mut planner = FftPlanner::new();
    let mut spec = vec![Complex64::new(0.0, 0.0); fw * fh];
    for py in 0..h + 2 * HALF {
        let sy = (py as i64 - HALF as i64).clamp(0, h as i64 - 1) as usize;
        for px in 0..w + 2 * HALF {
            let sx = (px as i64 - HALF as i64).clamp(0, w as i64 - 1) as usize;
            spec[py * fw + px] = Complex64::new(gray[sy * w + sx], 0.0);
        }
    }
    fft2(&mut spec, fw, fh, &mut planner, false);
    let scale = 1.0 / (fw * fh) as f64;
    let mut values = Vec::with_capacity(ORIENTATIONS.len() * GRID * GRID);
    for theta in ORIENTATIONS {
        let kern = gabor_kernel(theta);
        let mut kf = vec![Complex64::new(0.0, 0.0); fw * fh];
        for v in 0..k {
            for u in 0..k {
                kf[v * fw + u] = kern.taps[v * k + u];
            }
        }
        fft2(&mut kf, fw, fh, &mut planner, false);
        for (a, b) in kf.iter_mut().zip(&spec) {
            *a *= b;
        }
        fft2(&mut kf, fw, fh, &mut planner, true);
        let mut cells = vec![0.0; GRID * GRID];
        let mut counts = vec![0usize; GRID * GRID];
        for y in 0..h {
            for x in 0..w {
                let m = (kf[(y + 2 * HALF) * fw + x + 2 * HALF] * scale).norm();
                let cell = (y * GRID / h) * GRID + x * GRID / w;
                cells[cell] += m;
                counts[cell] += 1;
            }
        }
        values.extend(cells.iter().zip(&counts).map(|(s, &n)| s / n as f64));
    }
    Ok(FeatureBlock::new(BlockKind::Gist, values))
}

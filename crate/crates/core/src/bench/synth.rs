//! Synthetic shape/color corpus: one class per (shape, color) pair on a
//! lightly textured background.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::raster::ImageBuffer;
use crate::rng::rng_for;

const SHAPES: [&str; 3] = ["disc", "square", "stripes"];
const PALETTE: [[u8; 3]; 6] = [[200, 40, 40], [40, 170, 60], [40, 60, 200], [220, 180, 30], [150, 50, 170], [30, 170, 170]];

pub const MAX_CLASSES: usize = PALETTE.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub classes: usize,
    pub per_class: usize,
    pub side: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { classes: 3, per_class: 100, side: 128, seed: 0 }
    }
}

pub fn class_name(c: usize) -> String {
    format!("{c}_{}", SHAPES[c % SHAPES.len()])
}

fn jitter(rng: &mut ChaCha8Rng, base: [u8; 3], amount: i32) -> [u8; 3] {
    base.map(|v| (v as i32 + rng.random_range(-amount..=amount)).clamp(0, 255) as u8)
}

/// One image of class `c`. The object stays inside the central 70% so the
/// default segmentation rectangle encloses it.
pub fn render(c: usize, side: u32, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let s = side as f64;
    let color = jitter(rng, PALETTE[c % PALETTE.len()], 12);
    let dark = color.map(|v| v / 3);
    let bg = jitter(rng, [225, 222, 215], 6);
    let half = s * rng.random_range(0.18..0.26);
    let cx = s * 0.5 + rng.random_range(-0.06..0.06) * s;
    let cy = s * 0.5 + rng.random_range(-0.06..0.06) * s;
    let period = (s / 16.0).max(2.0);
    let noise: Vec<i32> = (0..side * side).map(|_| rng.random_range(-4..=4)).collect();
    ImageBuffer::from_fn(side, side, |x, y| {
        let dx = x as f64 + 0.5 - cx;
        let dy = y as f64 + 0.5 - cy;
        let inside = match c % SHAPES.len() {
            0 => dx * dx + dy * dy <= half * half,
            _ => dx.abs() <= half && dy.abs() <= half,
        };
        let base = if !inside {
            bg
        } else if c % SHAPES.len() == 2 && ((y as f64 + 0.5 - cy + half) / period).floor() as i64 % 2 == 1 {
            dark
        } else {
            color
        };
        let n = noise[(y * side + x) as usize];
        base.map(|v| (v as i32 + n).clamp(0, 255) as u8)
    })
}

/// Write `classes × per_class` PNGs under `out/<class>/NNNN.png`.
pub fn synth_corpus(out: &Path, cfg: &SynthConfig) -> Result<()> {
    if cfg.classes < 2 || cfg.classes > MAX_CLASSES {
        return Err(Error::Config(format!("classes must be in [2, {MAX_CLASSES}], got {}", cfg.classes)));
    }
    if cfg.per_class == 0 || cfg.side < 16 {
        return Err(Error::Config("per_class must be >= 1 and side >= 16".into()));
    }
    for c in 0..cfg.classes {
        let dir = out.join(class_name(c));
        fs::create_dir_all(&dir)?;
        let mut rng = rng_for(cfg.seed, c as u64);
        for i in 0..cfg.per_class {
            render(c, cfg.side, &mut rng).save_png(&dir.join(format!("{i:04}.png")))?;
        }
    }
    Ok(())
}

//! Foreground isolation: GrabCut segmentation followed by an Otsu
//! threshold and largest-component crop.

mod crop;
mod gmm;
mod grabcut;
pub mod maxflow;

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use crop::{components, otsu, threshold_crop, Crop};
pub use grabcut::{grabcut_segment, Segmentation, COMPONENTS, GAMMA};

use crate::error::{Error, Result};
use crate::raster::ImageBuffer;

pub const DEFAULT_ITERS: usize = 5;
pub const DEFAULT_INSET: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl CropBox {
    /// Box inset from every border by `fraction` of the image side.
    pub fn inset(width: u32, height: u32, fraction: f64) -> CropBox {
        let dx = ((width as f64 * fraction).round() as u32).max(1).min((width - 1) / 2);
        let dy = ((height as f64 * fraction).round() as u32).max(1).min((height - 1) / 2);
        CropBox { x: dx, y: dy, w: width - 2 * dx, h: height - 2 * dy }
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && y >= self.y && x < self.x + self.w && y < self.y + self.h
    }

    pub fn check_within(&self, width: u32, height: u32) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(Error::Validation(format!("empty box {self:?}")));
        }
        if self.x as u64 + self.w as u64 > width as u64 || self.y as u64 + self.h as u64 > height as u64 {
            return Err(Error::Validation(format!("box {self:?} exceeds {width}x{height}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }

    pub fn from_json(s: &str) -> Result<CropBox> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Binary foreground mask, row-major, one byte per pixel (0 or 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    values: Vec<u8>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, values: vec![0; width as usize * height as usize] }
    }

    pub fn full(width: u32, height: u32) -> Self {
        Self { width, height, values: vec![1; width as usize * height as usize] }
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let mut m = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                m.set(x, y, f(x, y));
            }
        }
        m
    }

    pub fn from_box(width: u32, height: u32, b: &CropBox) -> Self {
        Self::from_fn(width, height, |x, y| b.contains(x, y))
    }

    pub fn from_bools(width: u32, height: u32, v: &[bool]) -> Self {
        Self { width, height, values: v.iter().map(|&b| b as u8).collect() }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.values[(y * self.width + x) as usize] != 0
    }

    pub fn set(&mut self, x: u32, y: u32, on: bool) {
        self.values[(y * self.width + x) as usize] = on as u8;
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    pub fn crop(&self, b: &CropBox) -> Mask {
        Mask::from_fn(b.w, b.h, |x, y| self.get(b.x + x, b.y + y))
    }

    /// Intersection over union; two empty masks give 1.
    pub fn iou(&self, other: &Mask) -> f64 {
        let (mut inter, mut union) = (0usize, 0usize);
        for (a, b) in self.values.iter().zip(&other.values) {
            inter += (*a != 0 && *b != 0) as usize;
            union += (*a != 0 || *b != 0) as usize;
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Binary PGM (P5) with foreground at 255.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(f, "P5\n{} {}\n255\n", self.width, self.height)?;
        f.write_all(&self.values.iter().map(|&v| if v != 0 { 255 } else { 0 }).collect::<Vec<u8>>())?;
        f.flush()?;
        Ok(())
    }

    pub fn read_pgm(path: &Path) -> Result<Mask> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let bad = |m: &str| Error::Format(format!("{}: {m}", path.display()));
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        pos += 1;
        if fields[0] != "P5" {
            return Err(bad("not a P5 file"));
        }
        let num = |s: &str| s.parse::<u32>().map_err(|_| bad("bad header number"));
        let (w, h) = (num(&fields[1])?, num(&fields[2])?);
        let data = bytes.get(pos..pos + (w * h) as usize).ok_or_else(|| bad("truncated pixel data"))?;
        Ok(Mask { width: w, height: h, values: data.iter().map(|&v| (v > 127) as u8).collect() })
    }
}

/// Segmentation and crop with the default rectangle and iteration count.
#[derive(Debug, Clone, PartialEq)]
pub struct Isolated {
    pub crop: Crop,
    pub grabcut_fallback: bool,
}

impl Isolated {
    pub fn flagged(&self) -> bool {
        self.grabcut_fallback || self.crop.fallback
    }
}

pub fn isolate(img: &ImageBuffer, iters: usize, inset: f64) -> Result<Isolated> {
    let rect = CropBox::inset(img.width(), img.height(), inset);
    let seg = grabcut_segment(img, &rect, iters)?;
    Ok(Isolated { crop: threshold_crop(img, &seg.mask), grabcut_fallback: seg.fallback })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inset_box() {
        let b = CropBox::inset(400, 400, 0.05);
        assert_eq!(b, CropBox { x: 20, y: 20, w: 360, h: 360 });
        assert!(b.check_within(400, 400).is_ok());
        assert!(CropBox { x: 390, y: 0, w: 20, h: 5 }.check_within(400, 400).is_err());
    }

    #[test]
    fn pgm_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = Mask::from_fn(7, 5, |x, y| (x + y) % 3 == 0);
        let p = dir.path().join("m.pgm");
        m.write_pgm(&p).unwrap();
        assert_eq!(Mask::read_pgm(&p).unwrap(), m);
        let b = CropBox { x: 1, y: 2, w: 3, h: 4 };
        assert_eq!(b.to_json(), r#"{"x":1,"y":2,"w":3,"h":4}"#);
        assert_eq!(CropBox::from_json(&b.to_json()).unwrap(), b);
    }

    #[test]
    fn otsu_splits_bimodal() {
        let mut h = [0u64; 256];
        h[10] = 50;
        h[200] = 50;
        let t = otsu(&h).unwrap();
        assert!((10..200).contains(&t));
        assert_eq!(t, 10);
        let mut flat = [0u64; 256];
        flat[0] = 9;
        assert_eq!(otsu(&flat), None);
    }
}

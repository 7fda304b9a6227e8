//! 8-bit RGB raster and the pixel-level conversions shared by the
//! segmentation and descriptor code.

use std::path::Path;

use crate::error::{Error, Result};

/// Decoded 8-bit RGB image, row-major, three bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Validation("image dimensions must be positive".into()));
        }
        if pixels.len() != (width as usize) * (height as usize) * 3 {
            return Err(Error::Validation(format!(
                "pixel buffer of {} bytes does not match {width}x{height} RGB",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let pixels = rgb.iter().copied().cycle().take(width as usize * height as usize * 3).collect();
        Self { width, height, pixels }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn put_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.pixels.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    /// Luma with weights 0.299, 0.587, 0.114.
    pub fn gray(&self) -> Vec<f64> {
        self.pixels().map(luma).collect()
    }

    pub fn gray_u8(&self) -> Vec<u8> {
        self.pixels().map(|p| luma(p).round().clamp(0.0, 255.0) as u8).collect()
    }

    pub fn hflip(&self) -> Self {
        Self::from_fn(self.width, self.height, |x, y| self.pixel(self.width - 1 - x, y))
    }

    /// Exact counter-clockwise quarter turn.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        Self::from_fn(h, w, |x, y| self.pixel(w - 1 - y, x))
    }

    pub fn crop(&self, x0: u32, y0: u32, w: u32, h: u32) -> Self {
        Self::from_fn(w, h, |x, y| self.pixel(x0 + x, y0 + y))
    }

    /// Bilinear resampling with pixel-center alignment and edge clamping.
    /// A same-size request returns the image unchanged.
    pub fn resize_bilinear(&self, new_w: u32, new_h: u32) -> Self {
        assert!(new_w > 0 && new_h > 0, "target dimensions must be positive");
        if new_w == self.width && new_h == self.height {
            return self.clone();
        }
        let sx = self.width as f64 / new_w as f64;
        let sy = self.height as f64 / new_h as f64;
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        Self::from_fn(new_w, new_h, |x, y| {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
            let v = self.sample_bilinear(fx, fy);
            [0, 1, 2].map(|c| v[c].round().clamp(0.0, 255.0) as u8)
        })
    }

    /// Bilinear sample at a continuous position inside the pixel grid.
    pub fn sample_bilinear(&self, fx: f64, fy: f64) -> [f64; 3] {
        let x0 = fx.floor() as u32;
        let y0 = fy.floor() as u32;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let tx = fx - x0 as f64;
        let ty = fy - y0 as f64;
        let (p00, p10, p01, p11) = (self.pixel(x0, y0), self.pixel(x1, y0), self.pixel(x0, y1), self.pixel(x1, y1));
        [0, 1, 2].map(|c| {
            let top = lerp(p00[c] as f64, p10[c] as f64, tx);
            let bottom = lerp(p01[c] as f64, p11[c] as f64, tx);
            lerp(top, bottom, ty)
        })
    }

    pub fn from_dynamic(img: image::DynamicImage) -> Self {
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        Self { width: w, height: h, pixels: rgb.into_raw() }
    }

    pub fn open(path: &Path) -> Result<Self> {
        let img = image::ImageReader::open(path)
            .and_then(|r| r.with_guessed_format())
            .map_err(|e| Error::Decode { path: path.to_path_buf(), reason: e.to_string() })?
            .decode()
            .map_err(|e| Error::Decode { path: path.to_path_buf(), reason: e.to_string() })?;
        if img.width() == 0 || img.height() == 0 {
            return Err(Error::Decode { path: path.to_path_buf(), reason: "empty image".into() });
        }
        Ok(Self::from_dynamic(img))
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let buf = image::RgbImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("buffer length checked at construction");
        buf.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

#[inline]
pub fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

#[inline]
pub fn luma(p: [u8; 3]) -> f64 {
    0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64
}

/// 8-bit HSV in the common OpenCV range: H in [0, 180), S and V in [0, 255].
pub fn rgb_to_hsv(p: [u8; 3]) -> [u8; 3] {
    let (r, g, b) = (p[0] as f64, p[1] as f64, p[2] as f64);
    let v = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = v - min;
    let s = if v > 0.0 { (255.0 * delta / v).round() } else { 0.0 };
    let h_deg = if delta == 0.0 {
        0.0
    } else if v == r {
        60.0 * (g - b) / delta
    } else if v == g {
        120.0 + 60.0 * (b - r) / delta
    } else {
        240.0 + 60.0 * (r - g) / delta
    };
    let h_deg = if h_deg < 0.0 { h_deg + 360.0 } else { h_deg };
    let h = (h_deg / 2.0).round() as u32 % 180;
    [h as u8, s as u8, v as u8]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_size_resize_is_identity() {
        let img = ImageBuffer::from_fn(7, 5, |x, y| [(x * 30) as u8, (y * 40) as u8, 9]);
        assert_eq!(img.resize_bilinear(7, 5), img);
    }

    #[test]
    fn hsv_primaries() {
        assert_eq!(rgb_to_hsv([255, 0, 0]), [0, 255, 255]);
        assert_eq!(rgb_to_hsv([0, 255, 0]), [60, 255, 255]);
        assert_eq!(rgb_to_hsv([0, 0, 255]), [120, 255, 255]);
        assert_eq!(rgb_to_hsv([0, 0, 0]), [0, 0, 0]);
        assert_eq!(rgb_to_hsv([128, 128, 128]), [0, 0, 128]);
    }

    #[test]
    fn rotate90_four_times_is_identity() {
        let img = ImageBuffer::from_fn(6, 3, |x, y| [x as u8, y as u8, (x * y) as u8]);
        let r = img.rotate90().rotate90().rotate90().rotate90();
        assert_eq!(r, img);
        assert_eq!(img.rotate90().width(), 3);
    }
}

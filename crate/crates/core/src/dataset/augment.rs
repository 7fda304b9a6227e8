use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::raster::ImageBuffer;
use crate::rng::rng_for;

/// Randomized augmentation family; parameters are drawn from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AugmentPolicy {
    HFlip,
    Rotation { max_degrees: f64 },
    Brightness { max_fraction: f64 },
}

impl AugmentPolicy {
    pub const DEFAULT_SET: [AugmentPolicy; 3] = [
        AugmentPolicy::HFlip,
        AugmentPolicy::Rotation { max_degrees: 15.0 },
        AugmentPolicy::Brightness { max_fraction: 0.10 },
    ];

    pub fn sample(&self, seed: u64) -> Augmentation {
        let mut rng = rng_for(seed, 0xA116);
        match *self {
            AugmentPolicy::HFlip => Augmentation::HFlip,
            AugmentPolicy::Rotation { max_degrees } => {
                Augmentation::Rotate(rng.random_range(-max_degrees..=max_degrees))
            }
            AugmentPolicy::Brightness { max_fraction } => {
                Augmentation::Brightness(rng.random_range(-max_fraction..=max_fraction))
            }
        }
    }
}

/// A concrete augmentation with its parameter fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Augmentation {
    HFlip,
    /// Counter-clockwise rotation about the image center, in degrees.
    Rotate(f64),
    /// Multiplicative brightness change, `0.1` means +10%.
    Brightness(f64),
}

impl Augmentation {
    pub fn apply(&self, img: &ImageBuffer) -> ImageBuffer {
        match *self {
            Augmentation::HFlip => img.hflip(),
            Augmentation::Rotate(deg) => rotate(img, deg),
            Augmentation::Brightness(frac) => {
                let gain = 1.0 + frac;
                let raw = img.as_raw().iter().map(|&v| (v as f64 * gain).round().clamp(0.0, 255.0) as u8).collect();
                ImageBuffer::new(img.width(), img.height(), raw).expect("same dimensions")
            }
        }
    }
}

pub fn augment(img: &ImageBuffer, policy: AugmentPolicy, seed: u64) -> ImageBuffer {
    policy.sample(seed).apply(img)
}

/// Bilinear rotation; samples falling outside the source are black.
fn rotate(img: &ImageBuffer, degrees: f64) -> ImageBuffer {
    let (w, h) = (img.width(), img.height());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let (s, c) = degrees.to_radians().sin_cos();
    ImageBuffer::from_fn(w, h, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        // inverse map; y grows downward so a visual CCW turn negates the angle
        let sx = c * dx - s * dy + cx;
        let sy = s * dx + c * dy + cy;
        if sx < -0.5 || sy < -0.5 || sx > w as f64 - 0.5 || sy > h as f64 - 0.5 {
            return [0, 0, 0];
        }
        let v = img.sample_bilinear(sx.clamp(0.0, w as f64 - 1.0), sy.clamp(0.0, h as f64 - 1.0));
        v.map(|c| c.round().clamp(0.0, 255.0) as u8)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(seed: u64) -> ImageBuffer {
        let mut rng = rng_for(seed, 1);
        ImageBuffer::from_fn(31, 17, |_, _| [rng.random(), rng.random(), rng.random()])
    }

    #[test]
    fn hflip_is_involution() {
        let img = noise(5);
        let f = Augmentation::HFlip;
        assert_eq!(f.apply(&f.apply(&img)), img);
    }

    #[test]
    fn zero_brightness_is_identity() {
        let img = noise(6);
        assert_eq!(Augmentation::Brightness(0.0).apply(&img), img);
    }

    #[test]
    fn deterministic_and_dimension_preserving() {
        let img = noise(7);
        for p in AugmentPolicy::DEFAULT_SET {
            let a = augment(&img, p, 99);
            assert_eq!(a, augment(&img, p, 99));
            assert_eq!((a.width(), a.height()), (img.width(), img.height()));
        }
        match (AugmentPolicy::Rotation { max_degrees: 15.0 }).sample(3) {
            Augmentation::Rotate(d) => assert!(d.abs() <= 15.0),
            other => panic!("{other:?}"),
        }
    }

    /// Independent rasterizer: a pixel center is inside the rotated square
    /// if its coordinates, rotated back, fall inside the axis-aligned square.
    #[test]
    fn rotation_preserves_square_mass() {
        let side = 400u32;
        let (lo, hi) = (150u32, 250u32);
        let img = ImageBuffer::from_fn(side, side, |x, y| {
            if (lo..hi).contains(&x) && (lo..hi).contains(&y) { [255; 3] } else { [0; 3] }
        });
        let bright = |im: &ImageBuffer| im.pixels().filter(|p| p[0] > 127).count();
        let before = bright(&img);
        assert_eq!(before, 100 * 100);

        let rotated = Augmentation::Rotate(15.0).apply(&img);
        let after = bright(&rotated);

        let c = (side as f64 - 1.0) / 2.0;
        let (s, co) = 15f64.to_radians().sin_cos();
        let half = (hi - lo) as f64 / 2.0;
        let mut oracle = 0usize;
        for y in 0..side {
            for x in 0..side {
                let (dx, dy) = (x as f64 - c, y as f64 - c);
                let u = co * dx - s * dy;
                let v = s * dx + co * dy;
                if u.abs() < half && v.abs() < half {
                    oracle += 1;
                }
            }
        }
        assert!((oracle as f64 - before as f64).abs() / (before as f64) < 0.01);
        assert!((after as f64 - oracle as f64).abs() / (oracle as f64) < 0.01, "after {after} oracle {oracle}");
    }
}

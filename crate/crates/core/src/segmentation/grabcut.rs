use super::gmm::{kmeans, Color, Gmm};
use super::maxflow::{Graph, Segment};
use super::{CropBox, Mask};
use crate::error::{Error, Result};
use crate::raster::ImageBuffer;
use crate::rng::{fnv1a, rng_for};

pub const COMPONENTS: usize = 5;
pub const GAMMA: f64 = 50.0;
const KMEANS_ITERS: usize = 10;

/// Neighbour offsets covering each unordered 8-connected pair once.
const FORWARD: [(i64, i64); 4] = [(1, 0), (-1, 1), (0, 1), (1, 1)];

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub mask: Mask,
    /// Set when the rectangle itself was returned because the input was degenerate.
    pub fallback: bool,
    /// Gibbs energy after each iteration's cut.
    pub energy: Vec<f64>,
}

struct Problem {
    w: usize,
    h: usize,
    colors: Vec<Color>,
    inside: Vec<bool>,
    /// Pairwise weight per pixel and forward direction (0 where the neighbour is off-image).
    pair: Vec<[f64; 4]>,
}

impl Problem {
    fn new(img: &ImageBuffer, rect: &CropBox) -> Self {
        let (w, h) = (img.width() as usize, img.height() as usize);
        let colors: Vec<Color> = img.pixels().map(|p| [p[0] as f64, p[1] as f64, p[2] as f64]).collect();
        let inside = (0..w * h).map(|i| rect.contains((i % w) as u32, (i / w) as u32)).collect();
        let neighbour = |x: usize, y: usize, d: (i64, i64)| {
            let (nx, ny) = (x as i64 + d.0, y as i64 + d.1);
            (nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h).then(|| ny as usize * w + nx as usize)
        };
        let sq = |a: &Color, b: &Color| (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>();
        let (mut total, mut count) = (0.0, 0usize);
        for y in 0..h {
            for x in 0..w {
                for d in FORWARD {
                    if let Some(q) = neighbour(x, y, d) {
                        total += sq(&colors[y * w + x], &colors[q]);
                        count += 1;
                    }
                }
            }
        }
        let beta = if total > 0.0 { count as f64 / (2.0 * total) } else { 0.0 };
        let mut pair = vec![[0.0; 4]; w * h];
        for y in 0..h {
            for x in 0..w {
                let p = y * w + x;
                for (k, d) in FORWARD.iter().enumerate() {
                    if let Some(q) = neighbour(x, y, *d) {
                        let dist = if d.0 != 0 && d.1 != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                        pair[p][k] = GAMMA / dist * (-beta * sq(&colors[p], &colors[q])).exp();
                    }
                }
            }
        }
        Self { w, h, colors, inside, pair }
    }

    fn neighbour(&self, p: usize, k: usize) -> Option<usize> {
        let (x, y) = ((p % self.w) as i64 + FORWARD[k].0, (p / self.w) as i64 + FORWARD[k].1);
        (x >= 0 && y >= 0 && (x as usize) < self.w && (y as usize) < self.h).then(|| y as usize * self.w + x as usize)
    }

    fn energy(&self, fg_mask: &[bool], fg: &Gmm, bg: &Gmm) -> f64 {
        let mut e = 0.0;
        for (p, c) in self.colors.iter().enumerate() {
            e += if fg_mask[p] { fg.best(c).1 } else { bg.best(c).1 };
            for k in 0..4 {
                if let Some(q) = self.neighbour(p, k) {
                    if fg_mask[p] != fg_mask[q] {
                        e += self.pair[p][k];
                    }
                }
            }
        }
        e
    }

    fn fit_side(&self, fg_mask: &[bool], side: bool, gmm: &Gmm) -> Option<Gmm> {
        let pts: Vec<Color> = (0..self.colors.len()).filter(|&p| fg_mask[p] == side).map(|p| self.colors[p]).collect();
        if pts.is_empty() {
            return None;
        }
        let assign: Vec<usize> = pts.iter().map(|c| gmm.best(c).0).collect();
        Some(Gmm::fit(&pts, &assign, COMPONENTS))
    }

    fn cut(&self, fg: &Gmm, bg: &Gmm) -> Vec<bool> {
        let ids: Vec<usize> = {
            let mut next = 0;
            self.inside
                .iter()
                .map(|&i| {
                    if i {
                        next += 1;
                        next - 1
                    } else {
                        usize::MAX
                    }
                })
                .collect()
        };
        let n = self.inside.iter().filter(|&&i| i).count();
        let mut g = Graph::new(n, 4 * n);
        let mut sink_extra = vec![0.0; n];
        for p in 0..self.colors.len() {
            for k in 0..4 {
                let Some(q) = self.neighbour(p, k) else { continue };
                let wpq = self.pair[p][k];
                match (self.inside[p], self.inside[q]) {
                    (true, true) => g.add_edge(ids[p], ids[q], wpq, wpq),
                    // the outside neighbour is fixed background
                    (true, false) => sink_extra[ids[p]] += wpq,
                    (false, true) => sink_extra[ids[q]] += wpq,
                    (false, false) => {}
                }
            }
        }
        for p in 0..self.colors.len() {
            if self.inside[p] {
                let c = &self.colors[p];
                let i = ids[p];
                g.add_tweights(i, bg.best(c).1, fg.best(c).1 + sink_extra[i]);
            }
        }
        g.maxflow();
        (0..self.colors.len()).map(|p| self.inside[p] && g.segment(ids[p]) == Segment::Source).collect()
    }
}

fn initial_gmm(colors: &[Color], seed: u64, side: u64) -> Gmm {
    let mut rng = rng_for(seed, side);
    let assign = kmeans(colors, COMPONENTS, &mut rng, KMEANS_ITERS);
    Gmm::fit(colors, &assign, COMPONENTS)
}

/// GrabCut foreground extraction initialised from `rect`.
pub fn grabcut_segment(img: &ImageBuffer, rect: &CropBox, iters: usize) -> Result<Segmentation> {
    let (w, h) = (img.width(), img.height());
    rect.check_within(w, h).map_err(|e| Error::Init(e.to_string()))?;
    if rect.x == 0 && rect.y == 0 && rect.w == w && rect.h == h {
        return Err(Error::Init("initial rectangle covers the entire image".into()));
    }
    if iters == 0 {
        return Err(Error::Init("at least one iteration is required".into()));
    }
    let rect_mask = Mask::from_box(w, h, rect);
    let prob = Problem::new(img, rect);
    let fg_pts: Vec<Color> = (0..prob.colors.len()).filter(|&p| prob.inside[p]).map(|p| prob.colors[p]).collect();
    let bg_pts: Vec<Color> = (0..prob.colors.len()).filter(|&p| !prob.inside[p]).map(|p| prob.colors[p]).collect();
    if fg_pts.iter().all(|c| *c == fg_pts[0]) {
        return Ok(Segmentation { mask: rect_mask, fallback: true, energy: vec![] });
    }
    let seed = fnv1a(img.as_raw());
    let mut fg = initial_gmm(&fg_pts, seed, 0);
    let mut bg = initial_gmm(&bg_pts, seed, 1);
    let mut labels: Vec<bool> = prob.inside.clone();
    let mut energy = Vec::with_capacity(iters);
    for it in 0..iters {
        if it > 0 {
            let current = prob.energy(&labels, &fg, &bg);
            let new_fg = prob.fit_side(&labels, true, &fg).unwrap_or_else(|| fg.clone());
            let new_bg = prob.fit_side(&labels, false, &bg).unwrap_or_else(|| bg.clone());
            // regularized refits are not exact minimizers, so only keep improvements
            if prob.energy(&labels, &new_fg, &new_bg) <= current {
                fg = new_fg;
                bg = new_bg;
            }
        }
        labels = prob.cut(&fg, &bg);
        energy.push(prob.energy(&labels, &fg, &bg));
    }
    let mask = Mask::from_bools(w, h, &labels);
    if mask.count() == 0 {
        return Ok(Segmentation { mask: rect_mask, fallback: true, energy });
    }
    Ok(Segmentation { mask, fallback: false, energy })
}

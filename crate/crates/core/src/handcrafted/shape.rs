use super::{check_mask, BlockKind, FeatureBlock};
use crate::error::{Error, Result};
use crate::raster::ImageBuffer;
use crate::segmentation::{components, Mask};

/// Clockwise neighbour ring in image coordinates (y down), starting east.
const RING: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// The largest 8-connected foreground component as a mask; the first one
/// in raster order wins ties.
pub fn largest_component(mask: &Mask) -> Option<Mask> {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let on: Vec<bool> = mask.values().iter().map(|&v| v != 0).collect();
    let (labels, sizes) = components(&on, w, h);
    let mut best: Option<(usize, usize)> = None;
    for (k, &s) in sizes.iter().enumerate() {
        if best.is_none_or(|b| s > b.1) {
            best = Some((k, s));
        }
    }
    let id = best?.0 as u32 + 1;
    Some(Mask::from_bools(mask.width(), mask.height(), &labels.iter().map(|&l| l == id).collect::<Vec<_>>()))
}

/// Length of the outer boundary traced through pixel centers, with unit
/// steps for 4-neighbours and sqrt(2) for diagonals.
pub fn trace_perimeter(comp: &Mask) -> f64 {
    let (w, h) = (comp.width() as i64, comp.height() as i64);
    let on = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && comp.get(x as u32, y as u32);
    let Some(first) = comp.values().iter().position(|&v| v != 0) else { return 0.0 };
    let start = (first as i64 % w, first as i64 / w);
    let step_len = |d: usize| if d % 2 == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
    // the west neighbour of the first pixel in raster order is background
    let mut p = start;
    let mut back = 4usize;
    let mut first_move: Option<usize> = None;
    let mut length = 0.0;
    loop {
        let mut found = None;
        for i in 1..=8 {
            let d = (back + i) % 8;
            if on(p.0 + RING[d].0, p.1 + RING[d].1) {
                found = Some(d);
                break;
            }
        }
        let Some(d) = found else { return 0.0 };
        if p == start {
            match first_move {
                Some(f) if f == d => return length,
                None => first_move = Some(d),
                _ => {}
            }
        }
        let prev = (d + 7) % 8;
        let c = (p.0 + RING[prev].0, p.1 + RING[prev].1);
        let q = (p.0 + RING[d].0, p.1 + RING[d].1);
        back = RING.iter().position(|&r| (q.0 + r.0, q.1 + r.1) == c).expect("adjacent ring cells");
        length += step_len(d);
        p = q;
    }
}

/// Area of the convex hull of the pixel squares' corners.
pub fn convex_hull_area(comp: &Mask) -> f64 {
    let mut pts: Vec<(i64, i64)> = Vec::new();
    for y in 0..comp.height() {
        let row: Vec<u32> = (0..comp.width()).filter(|&x| comp.get(x, y)).collect();
        if let (Some(&a), Some(&b)) = (row.first(), row.last()) {
            let (a, b, y) = (a as i64, b as i64 + 1, y as i64);
            pts.extend([(a, y), (a, y + 1), (b, y), (b, y + 1)]);
        }
    }
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let chain = |it: &mut dyn Iterator<Item = &(i64, i64)>| {
        let mut c: Vec<(i64, i64)> = Vec::new();
        for &p in it {
            while c.len() >= 2 && cross(c[c.len() - 2], c[c.len() - 1], p) <= 0 {
                c.pop();
            }
            c.push(p);
        }
        c.pop();
        c
    };
    let mut hull = chain(&mut pts.iter());
    hull.extend(chain(&mut pts.iter().rev()));
    let n = hull.len();
    let twice: i64 = (0..n).map(|i| hull[i].0 * hull[(i + 1) % n].1 - hull[(i + 1) % n].0 * hull[i].1).sum();
    twice.abs() as f64 / 2.0
}

/// Area, perimeter, aspect ratio, extent and solidity of the largest component.
pub fn extract_contour(img: &ImageBuffer, mask: &Mask) -> Result<FeatureBlock> {
    check_mask(img, mask)?;
    let comp = largest_component(mask).ok_or_else(|| Error::DegenerateInput("empty mask".into()))?;
    let area = comp.count() as f64;
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
    for y in 0..comp.height() {
        for x in 0..comp.width() {
            if comp.get(x, y) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    let (bw, bh) = ((x1 - x0 + 1) as f64, (y1 - y0 + 1) as f64);
    let values = vec![area, trace_perimeter(&comp), bw / bh, area / (bw * bh), area / convex_hull_area(&comp)];
    Ok(FeatureBlock::new(BlockKind::Contour, values))
}

/// The seven Hu invariants of an intensity image.
pub fn hu_moments(width: u32, values: &[f64]) -> Option<[f64; 7]> {
    let w = width as usize;
    let m00: f64 = values.iter().sum();
    if m00 <= 0.0 {
        return None;
    }
    // Coordinates relative to the support's corner, so integer shifts of
    // the input give bit-identical moments.
    let support = values.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, _)| (i % w, i / w));
    let (x0, y0) = support.fold((usize::MAX, usize::MAX), |(a, b), (x, y)| (a.min(x), b.min(y)));
    let (mut m10, mut m01) = (0.0, 0.0);
    for (i, &v) in values.iter().enumerate() {
        if v != 0.0 {
            m10 += (i % w - x0) as f64 * v;
            m01 += (i / w - y0) as f64 * v;
        }
    }
    let (cx, cy) = (m10 / m00, m01 / m00);
    let mut mu = [[0.0f64; 4]; 4];
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let (dx, dy) = ((i % w - x0) as f64 - cx, (i / w - y0) as f64 - cy);
        let xs = [1.0, dx, dx * dx, dx * dx * dx];
        let ys = [1.0, dy, dy * dy, dy * dy * dy];
        for p in 0..4 {
            for q in 0..4 - p {
                mu[p][q] += xs[p] * ys[q] * v;
            }
        }
    }
    let eta = |p: usize, q: usize| mu[p][q] / m00.powf(1.0 + (p + q) as f64 / 2.0);
    let (n20, n02, n11) = (eta(2, 0), eta(0, 2), eta(1, 1));
    let (n30, n03, n21, n12) = (eta(3, 0), eta(0, 3), eta(2, 1), eta(1, 2));
    let a = n30 + n12;
    let b = n21 + n03;
    Some([
        n20 + n02,
        (n20 - n02).powi(2) + 4.0 * n11 * n11,
        (n30 - 3.0 * n12).powi(2) + (3.0 * n21 - n03).powi(2),
        a * a + b * b,
        (n30 - 3.0 * n12) * a * (a * a - 3.0 * b * b) + (3.0 * n21 - n03) * b * (3.0 * a * a - b * b),
        (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b,
        (3.0 * n21 - n03) * a * (a * a - 3.0 * b * b) - (n30 - 3.0 * n12) * b * (3.0 * a * a - b * b),
    ])
}

/// Hu moments of the masked grayscale image, as `sign(h) log10(|h| + 1e-30)`.
pub fn extract_hu(img: &ImageBuffer, mask: &Mask) -> Result<FeatureBlock> {
    check_mask(img, mask)?;
    let gray: Vec<f64> = img.gray().iter().zip(mask.values()).map(|(&g, &m)| if m != 0 { g } else { 0.0 }).collect();
    let hu = hu_moments(img.width(), &gray).ok_or_else(|| Error::DegenerateInput("zero grayscale mass".into()))?;
    let values = hu.iter().map(|&h| h.signum() * (h.abs() + 1e-30).log10()).collect();
    Ok(FeatureBlock::new(BlockKind::Hu, values))
}

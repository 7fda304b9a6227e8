//! Full-covariance Gaussian mixtures over RGB with hard component assignment.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

pub type Color = [f64; 3];

/// Added to covariance diagonals so single-color components stay invertible.
pub const COV_REG: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
struct Component {
    weight: f64,
    mean: Color,
    inv: [[f64; 3]; 3],
    /// `-ln(weight) + 0.5 ln det(cov)`.
    offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gmm {
    comps: Vec<Component>,
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inv3(m: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            r[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    r
}

fn dist2(a: &Color, b: &Color) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

impl Gmm {
    #[cfg(test)]
    fn len(&self) -> usize {
        self.comps.len()
    }

    /// Negative log of the weighted density of component `k`, up to a constant.
    pub fn cost(&self, k: usize, x: &Color) -> f64 {
        let c = &self.comps[k];
        let d = [x[0] - c.mean[0], x[1] - c.mean[1], x[2] - c.mean[2]];
        let mut maha = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                maha += d[i] * c.inv[i][j] * d[j];
            }
        }
        c.offset + 0.5 * maha
    }

    /// Cheapest component for `x` and its cost; ties go to the lower index.
    pub fn best(&self, x: &Color) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for k in 0..self.comps.len() {
            let c = self.cost(k, x);
            if c < best.1 {
                best = (k, c);
            }
        }
        best
    }

    /// Maximum-likelihood fit of each component to the points assigned to it.
    /// Components without points are dropped.
    pub fn fit(points: &[Color], assign: &[usize], k: usize) -> Gmm {
        let mut n = vec![0usize; k];
        let mut sum = vec![[0.0; 3]; k];
        for (p, &a) in points.iter().zip(assign) {
            n[a] += 1;
            for i in 0..3 {
                sum[a][i] += p[i];
            }
        }
        let means: Vec<Color> =
            (0..k).map(|c| if n[c] > 0 { sum[c].map(|s| s / n[c] as f64) } else { [0.0; 3] }).collect();
        let mut cov = vec![[[0.0; 3]; 3]; k];
        for (p, &a) in points.iter().zip(assign) {
            let d = [p[0] - means[a][0], p[1] - means[a][1], p[2] - means[a][2]];
            for i in 0..3 {
                for j in 0..3 {
                    cov[a][i][j] += d[i] * d[j];
                }
            }
        }
        let total = points.len() as f64;
        let comps = (0..k)
            .filter(|&c| n[c] > 0)
            .map(|c| {
                let mut m = cov[c];
                for (i, row) in m.iter_mut().enumerate() {
                    for v in row.iter_mut() {
                        *v /= n[c] as f64;
                    }
                    row[i] += COV_REG;
                }
                let det = det3(&m);
                let weight = n[c] as f64 / total;
                Component { weight, mean: means[c], inv: inv3(&m, det), offset: -weight.ln() + 0.5 * det.ln() }
            })
            .collect();
        Gmm { comps }
    }
}

/// Seeded Lloyd k-means; returns per-point cluster ids in `0..k'` with
/// `k' <= k` (fewer when there are fewer distinct colors).
pub fn kmeans(points: &[Color], k: usize, rng: &mut ChaCha8Rng, iters: usize) -> Vec<usize> {
    let mut distinct: Vec<Color> = points.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    distinct.shuffle(rng);
    let mut centers: Vec<Color> = distinct.into_iter().take(k).collect();
    let mut assign = vec![0usize; points.len()];
    for _ in 0..iters {
        let mut changed = false;
        for (p, a) in points.iter().zip(assign.iter_mut()) {
            let mut best = (0, f64::INFINITY);
            for (c, ctr) in centers.iter().enumerate() {
                let d = dist2(p, ctr);
                if d < best.1 {
                    best = (c, d);
                }
            }
            if *a != best.0 {
                *a = best.0;
                changed = true;
            }
        }
        let mut sum = vec![[0.0; 3]; centers.len()];
        let mut n = vec![0usize; centers.len()];
        for (p, &a) in points.iter().zip(&assign) {
            n[a] += 1;
            for i in 0..3 {
                sum[a][i] += p[i];
            }
        }
        for c in 0..centers.len() {
            if n[c] > 0 {
                centers[c] = sum[c].map(|s| s / n[c] as f64);
            }
        }
        if !changed {
            break;
        }
    }
    assign
}

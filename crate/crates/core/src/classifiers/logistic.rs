//! Multinomial logistic regression trained by full-batch gradient descent
//! with Armijo backtracking.

use serde::{Deserialize, Serialize};

use super::focal::{focal_logit_coefficient, focal_value};
use super::softmax;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Loss {
    CrossEntropy,
    Focal { gamma: f64, alpha: f64 },
}

impl Loss {
    pub fn focal_default() -> Self {
        Loss::Focal { gamma: 2.0, alpha: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub loss: Loss,
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self { loss: Loss::CrossEntropy, l2: 1e-4, max_iter: 2000, tol: 1e-6 }
    }
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        if let Loss::Focal { gamma, alpha } = self.loss {
            if !(gamma >= 0.0 && gamma.is_finite()) {
                return Err(Error::Config(format!("focal gamma must be >= 0, got {gamma}")));
            }
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::Config(format!("focal alpha must lie in (0, 1], got {alpha}")));
            }
        }
        if self.l2 < 0.0 || self.tol <= 0.0 {
            return Err(Error::Config("l2 must be >= 0 and tol > 0".into()));
        }
        Ok(())
    }
}

/// Weights are `class_count × (d + 1)`, row-major, bias in the last column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub class_count: usize,
    pub dim: usize,
    pub weights: Vec<f64>,
    /// Objective value at every iterate, starting from the zero model.
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

impl LogisticModel {
    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        logits(&self.weights, x, self.class_count, self.dim)
    }

    pub fn score(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.logits(x))
    }
}

fn logits(w: &[f64], x: &[f64], c: usize, d: usize) -> Vec<f64> {
    (0..c)
        .map(|k| {
            let row = &w[k * (d + 1)..(k + 1) * (d + 1)];
            row[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + row[d]
        })
        .collect()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Mean loss plus `l2/2 * ||W||^2` (bias excluded), and its gradient.
pub fn objective(x: &Matrix, labels: &[usize], class_count: usize, w: &[f64], loss: Loss, l2: f64) -> (f64, Vec<f64>) {
    let (n, d, c) = (x.rows(), x.cols(), class_count);
    let mut grad = vec![0.0; c * (d + 1)];
    let mut total = 0.0;
    for (row, &y) in x.iter_rows().zip(labels) {
        let z = logits(w, row, c, d);
        let p = softmax(&z);
        let coef = match loss {
            Loss::CrossEntropy => {
                total += log_sum_exp(&z) - z[y];
                1.0
            }
            Loss::Focal { gamma, alpha } => {
                total += focal_value(p[y], gamma, alpha);
                focal_logit_coefficient(p[y], gamma, alpha)
            }
        };
        for k in 0..c {
            let r = coef * (p[k] - if k == y { 1.0 } else { 0.0 });
            if r == 0.0 {
                continue;
            }
            let g = &mut grad[k * (d + 1)..(k + 1) * (d + 1)];
            for (gj, xj) in g[..d].iter_mut().zip(row) {
                *gj += r * xj;
            }
            g[d] += r;
        }
    }
    let inv_n = 1.0 / n as f64;
    let mut value = total * inv_n;
    for k in 0..c {
        for j in 0..=d {
            let idx = k * (d + 1) + j;
            grad[idx] *= inv_n;
            if j < d {
                value += 0.5 * l2 * w[idx] * w[idx];
                grad[idx] += l2 * w[idx];
            }
        }
    }
    (value, grad)
}

pub fn fit(x: &Matrix, labels: &[usize], class_count: usize, params: &LogisticParams) -> Result<LogisticModel> {
    let d = x.cols();
    let mut w = vec![0.0; class_count * (d + 1)];
    let (mut value, mut grad) = objective(x, labels, class_count, &w, params.loss, params.l2);
    let mut history = vec![value];
    let mut step: f64 = 1.0;
    for _ in 0..params.max_iter {
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < params.tol {
            break;
        }
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        let mut t = (step * 2.0).min(1e3);
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = w.iter().zip(&grad).map(|(wi, gi)| wi - t * gi).collect();
            let (v, g) = objective(x, labels, class_count, &cand, params.loss, params.l2);
            if v <= value - 1e-4 * t * gnorm2 {
                accepted = Some((cand, v, g));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, v, g)) => {
                w = cand;
                value = v;
                grad = g;
                step = t;
                history.push(value);
            }
            None => break,
        }
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Training("logistic regression diverged".into()));
    }
    Ok(LogisticModel { class_count, dim: d, weights: w, loss_history: history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_predict_class_zero() {
        let m = LogisticModel { class_count: 3, dim: 2, weights: vec![0.0; 9], loss_history: vec![] };
        let s = m.score(&[1.0, -2.0]);
        assert_eq!(super::super::argmax(&s), 0);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_history_is_decreasing() {
        let x = Matrix::from_rows(&[vec![-1.0, 0.2], vec![-0.8, -0.1], vec![1.0, 0.3], vec![0.9, -0.4]]).unwrap();
        let m = fit(&x, &[0, 0, 1, 1], 2, &LogisticParams { max_iter: 100, ..Default::default() }).unwrap();
        assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(m.score(&[-1.0, 0.0])[0] > 0.9);
    }
}

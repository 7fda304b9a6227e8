//! One-vs-rest support vector classification. Each binary problem is solved
//! by sequential minimal optimization with second-order working-set
//! selection; margins are turned into scores by a softmax.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::softmax;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const TAU: f64 = 1e-12;
/// Above this many samples kernel rows are computed on demand.
const FULL_GRAM_LIMIT: usize = 4000;
const ROW_CACHE_ROWS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// `exp(-gamma * ||a - b||^2)`; `gamma = None` means `1 / (d * var(X))`.
    Rbf { gamma: Option<f64> },
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: Kernel,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, kernel: Kernel::Rbf { gamma: None }, tol: 1e-3, max_iter: 1_000_000 }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::Config(format!("svm C must be > 0, got {}", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("svm tolerance must be > 0".into()));
        }
        if let Kernel::Rbf { gamma: Some(g) } = self.kernel {
            if !(g > 0.0) {
                return Err(Error::Config("rbf gamma must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Kernel with its bandwidth resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResolvedKernel {
    Rbf { gamma: f64 },
    Linear,
}

impl ResolvedKernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            ResolvedKernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            ResolvedKernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

/// Access to kernel rows of the training set.
pub trait KernelRows {
    fn len(&self) -> usize;
    fn diag(&self, i: usize) -> f64;
    fn row(&mut self, i: usize) -> &[f64];
}

pub struct FullGram {
    n: usize,
    k: Vec<f64>,
}

impl FullGram {
    pub fn new(x: &Matrix, kernel: ResolvedKernel) -> Self {
        let n = x.rows();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = kernel.eval(x.row(i), x.row(j));
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        Self { n, k }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }
}

/// Borrowed view over a shared Gram matrix.
pub struct GramView<'a>(pub &'a FullGram);

impl KernelRows for GramView<'_> {
    fn len(&self) -> usize {
        self.0.n
    }
    fn diag(&self, i: usize) -> f64 {
        self.0.k[i * self.0.n + i]
    }
    fn row(&mut self, i: usize) -> &[f64] {
        &self.0.k[i * self.0.n..(i + 1) * self.0.n]
    }
}

/// Kernel rows computed on demand with a bounded FIFO cache.
pub struct CachedRows<'a> {
    x: &'a Matrix,
    kernel: ResolvedKernel,
    diag: Vec<f64>,
    cache: HashMap<usize, Vec<f64>>,
    order: VecDeque<usize>,
}

impl<'a> CachedRows<'a> {
    pub fn new(x: &'a Matrix, kernel: ResolvedKernel) -> Self {
        let diag = x.iter_rows().map(|r| kernel.eval(r, r)).collect();
        Self { x, kernel, diag, cache: HashMap::new(), order: VecDeque::new() }
    }
}

impl KernelRows for CachedRows<'_> {
    fn len(&self) -> usize {
        self.x.rows()
    }
    fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }
    fn row(&mut self, i: usize) -> &[f64] {
        if !self.cache.contains_key(&i) {
            if self.order.len() >= ROW_CACHE_ROWS {
                if let Some(old) = self.order.pop_front() {
                    self.cache.remove(&old);
                }
            }
            let xi = self.x.row(i);
            let row = self.x.iter_rows().map(|r| self.kernel.eval(xi, r)).collect();
            self.cache.insert(i, row);
            self.order.push_back(i);
        }
        &self.cache[&i]
    }
}

/// Dual solution of one binary problem with labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    /// Decision function is `sum_i alpha_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
}

/// Solve `min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0` with `Q_ij = y_i y_j K_ij`.
/// Stops when the maximal KKT violation falls below `tol`.
pub fn solve_binary(kr: &mut dyn KernelRows, y: &[f64], c: f64, tol: f64, max_iter: usize) -> Result<BinarySolution> {
    let n = kr.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let qd: Vec<f64> = (0..n).map(|i| kr.diag(i)).collect();
    let mut iter = 0;
    loop {
        // working set i: maximal violating index in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if y[t] > 0.0 {
                if alpha[t] < c && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = Some(t);
                }
            } else if alpha[t] > 0.0 && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = Some(t);
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        if let Some(i) = i_sel {
            let ki = kr.row(i).to_vec();
            let mut obj_min = f64::INFINITY;
            for t in 0..n {
                let (in_low, grad_diff, yg) = if y[t] > 0.0 {
                    (alpha[t] > 0.0, gmax + grad[t], grad[t])
                } else {
                    (alpha[t] < c, gmax - grad[t], -grad[t])
                };
                if !in_low {
                    continue;
                }
                if yg >= gmax2 {
                    gmax2 = yg;
                }
                if grad_diff > 0.0 {
                    let quad = (qd[i] + qd[t] - 2.0 * ki[t]).max(TAU);
                    let obj = -(grad_diff * grad_diff) / quad;
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (i, j) = match (i_sel, j_sel) {
            (Some(i), Some(j)) if gmax + gmax2 >= tol => (i, j),
            _ => break,
        };
        iter += 1;
        if iter > max_iter {
            return Err(Error::Training(format!(
                "SMO did not converge in {max_iter} iterations (violation {:.3e})",
                gmax + gmax2
            )));
        }
        let ki = kr.row(i).to_vec();
        let kj = kr.row(j).to_vec();
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * ki[j];
        if y[i] != y[j] {
            let quad = (qd[i] + qd[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qd[i] + qd[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 { sum_free / free as f64 } else { (ub + lb) / 2.0 };
    Ok(BinarySolution { alpha, rho, iterations: iter })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: ResolvedKernel,
    pub dim: usize,
    /// Union of support vectors over all one-vs-rest problems, row-major.
    pub support: Vec<f64>,
    /// Per class, `alpha_i * y_i` for every vector in `support`.
    pub coef: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
}

pub fn resolve_kernel(kernel: Kernel, x: &Matrix) -> ResolvedKernel {
    match kernel {
        Kernel::Linear => ResolvedKernel::Linear,
        Kernel::Rbf { gamma: Some(g) } => ResolvedKernel::Rbf { gamma: g },
        Kernel::Rbf { gamma: None } => {
            let v = x.as_slice();
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
            let var = if var > 0.0 { var } else { 1.0 };
            ResolvedKernel::Rbf { gamma: 1.0 / (x.cols() as f64 * var) }
        }
    }
}

/// Binary targets for class `c` against the rest.
pub fn ovr_targets(labels: &[usize], c: usize) -> Vec<f64> {
    labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect()
}

pub fn fit(x: &Matrix, labels: &[usize], class_count: usize, params: &SvmParams) -> Result<SvmModel> {
    let kernel = resolve_kernel(params.kernel, x);
    let solutions: Vec<BinarySolution> = if x.rows() <= FULL_GRAM_LIMIT {
        let gram = FullGram::new(x, kernel);
        (0..class_count)
            .into_par_iter()
            .map(|c| solve_binary(&mut GramView(&gram), &ovr_targets(labels, c), params.c, params.tol, params.max_iter))
            .collect::<Result<_>>()?
    } else {
        (0..class_count)
            .into_par_iter()
            .map(|c| {
                solve_binary(&mut CachedRows::new(x, kernel), &ovr_targets(labels, c), params.c, params.tol, params.max_iter)
            })
            .collect::<Result<_>>()?
    };
    let sv: Vec<usize> = (0..x.rows()).filter(|&i| solutions.iter().any(|s| s.alpha[i] > 0.0)).collect();
    let support = x.select_rows(&sv).as_slice().to_vec();
    let coef = solutions
        .iter()
        .enumerate()
        .map(|(c, s)| sv.iter().map(|&i| s.alpha[i] * if labels[i] == c { 1.0 } else { -1.0 }).collect())
        .collect();
    let rho = solutions.iter().map(|s| s.rho).collect();
    Ok(SvmModel { kernel, dim: x.cols(), support, coef, rho })
}

impl SvmModel {
    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        let kv: Vec<f64> = self.support.chunks_exact(self.dim).map(|s| self.kernel.eval(s, x)).collect();
        self.coef.iter().zip(&self.rho).map(|(c, r)| c.iter().zip(&kv).map(|(a, k)| a * k).sum::<f64>() - r).collect()
    }

    pub fn score(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.margins(x))
    }

    pub fn support_count(&self) -> usize {
        self.support.len() / self.dim.max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_pair_has_unit_margins() {
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0]]).unwrap();
        let gram = FullGram::new(&x, ResolvedKernel::Linear);
        let sol = solve_binary(&mut GramView(&gram), &[-1.0, 1.0], 10.0, 1e-6, 1000).unwrap();
        assert!((sol.alpha[0] - 0.5).abs() < 1e-9);
        assert!(sol.rho.abs() < 1e-9);
    }

    #[test]
    fn iteration_cap_is_training_error() {
        let x = Matrix::from_rows(&[vec![-1.0], vec![-0.5], vec![0.5], vec![1.0]]).unwrap();
        let gram = FullGram::new(&x, ResolvedKernel::Linear);
        let err = solve_binary(&mut GramView(&gram), &[-1.0, 1.0, -1.0, 1.0], 1.0, 1e-9, 0).unwrap_err();
        assert!(matches!(err, Error::Training(_)));
    }

    #[test]
    fn cached_rows_agree_with_full_gram() {
        let x = Matrix::from_rows(&[vec![0.0, 1.0], vec![2.0, -1.0], vec![0.5, 0.5]]).unwrap();
        let k = ResolvedKernel::Rbf { gamma: 0.3 };
        let full = FullGram::new(&x, k);
        let mut cached = CachedRows::new(&x, k);
        for i in 0..3 {
            let row = cached.row(i).to_vec();
            for j in 0..3 {
                assert_eq!(row[j], full.get(i, j));
            }
        }
    }
}

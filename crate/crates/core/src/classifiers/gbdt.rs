//! Histogram gradient boosting for multiclass softmax loss.
//!
//! Features are quantized into at most `max_bins` quantile bins. Each round
//! fits one regression tree per class on the gradient and hessian of the
//! softmax cross-entropy. Trees grow level-wise to a fixed depth or
//! leaf-wise up to a leaf budget.
//!
//! Split search walks per-feature row lists presorted by bin, which visits
//! exactly the bin boundaries a histogram scan would, at a cost linear in
//! the node size.

use serde::{Deserialize, Serialize};

use super::softmax;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    #[default]
    LevelWise,
    LeafWise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtParams {
    pub growth: Growth,
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_bins: usize,
    /// Depth limit for level-wise growth.
    pub max_depth: usize,
    /// Leaf budget for leaf-wise growth.
    pub max_leaves: usize,
    pub lambda: f64,
    pub min_leaf: usize,
    pub min_child_hessian: f64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            growth: Growth::LevelWise,
            rounds: 200,
            learning_rate: 0.1,
            max_bins: 256,
            max_depth: 6,
            max_leaves: 31,
            lambda: 1.0,
            min_leaf: 1,
            min_child_hessian: 1e-3,
        }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config("gbdt needs at least one round".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(2..=256).contains(&self.max_bins) {
            return Err(Error::Config("max_bins must lie in 2..=256".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::Config("tree depth must be >= 1".into()));
        }
        if self.max_leaves < 2 {
            return Err(Error::Config("max_leaves must be >= 2".into()));
        }
        if !(self.lambda >= 0.0) || self.min_leaf == 0 || !(self.min_child_hessian >= 0.0) {
            return Err(Error::Config("invalid gbdt regularization".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GbNode {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbTree {
    pub nodes: Vec<GbNode>,
}

impl GbTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                GbNode::Leaf { value } => return *value,
                GbNode::Split { feature, threshold, left, right } => {
                    id = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, GbNode::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn rec(t: &GbTree, id: usize) -> usize {
            match &t.nodes[id] {
                GbNode::Leaf { .. } => 0,
                GbNode::Split { left, right, .. } => 1 + rec(t, *left).max(rec(t, *right)),
            }
        }
        rec(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    /// Log class priors.
    pub init: Vec<f64>,
    /// One tree per class per round, learning rate folded into the leaves.
    pub rounds: Vec<Vec<GbTree>>,
    /// Mean training cross-entropy before the first round and after each round.
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

impl GbdtModel {
    pub fn raw(&self, x: &[f64]) -> Vec<f64> {
        let mut f = self.init.clone();
        for round in &self.rounds {
            for (fk, t) in f.iter_mut().zip(round) {
                *fk += t.predict(x);
            }
        }
        f
    }

    pub fn score(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.raw(x))
    }
}

/// Quantile bin boundaries; a value `v` falls in bin `#{t : t < v}`, so
/// `bin <= b` is equivalent to `v <= thresholds[b]`.
pub fn bin_thresholds(values: &[f64], max_bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut unique = sorted.clone();
    unique.dedup();
    let cut = |a: f64, b: f64| {
        let m = a + (b - a) / 2.0;
        if m < b { m } else { a }
    };
    if unique.len() <= max_bins {
        return unique.windows(2).map(|w| cut(w[0], w[1])).collect();
    }
    let n = sorted.len();
    let mut out: Vec<f64> = Vec::with_capacity(max_bins - 1);
    for j in 1..max_bins {
        let i = j * n / max_bins;
        let (a, b) = (sorted[i - 1], sorted[i]);
        if a < b {
            let t = cut(a, b);
            if out.last().is_none_or(|&l| l < t) {
                out.push(t);
            }
        }
    }
    out
}

struct Binned {
    n: usize,
    /// Feature-major bin indices.
    bins: Vec<u8>,
    thresholds: Vec<Vec<f64>>,
    /// Per feature, all rows ordered by (bin, row).
    order: Vec<Vec<u32>>,
}

impl Binned {
    fn new(x: &Matrix, max_bins: usize) -> Self {
        let (n, d) = (x.rows(), x.cols());
        let mut bins = vec![0u8; n * d];
        let mut thresholds = Vec::with_capacity(d);
        let mut order = Vec::with_capacity(d);
        let mut col = vec![0.0; n];
        for f in 0..d {
            for (i, c) in col.iter_mut().enumerate() {
                *c = x.get(i, f);
            }
            let t = bin_thresholds(&col, max_bins);
            let b = &mut bins[f * n..(f + 1) * n];
            for (bi, &v) in b.iter_mut().zip(&col) {
                *bi = t.partition_point(|&th| th < v) as u8;
            }
            let mut o: Vec<u32> = (0..n as u32).collect();
            o.sort_by_key(|&r| b[r as usize]);
            thresholds.push(t);
            order.push(o);
        }
        Self { n, bins, thresholds, order }
    }

    fn bin(&self, f: usize, row: u32) -> u8 {
        self.bins[f * self.n + row as usize]
    }
}

struct Split {
    gain: f64,
    feature: usize,
    bin: u8,
}

struct Pending {
    node: usize,
    depth: usize,
    lists: Vec<Vec<u32>>,
    g: f64,
    h: f64,
    split: Option<Split>,
}

struct Grower<'a> {
    data: &'a Binned,
    grad: &'a [f64],
    hess: &'a [f64],
    p: &'a GbdtParams,
}

impl Grower<'_> {
    fn best_split(&self, lists: &[Vec<u32>], g: f64, h: f64) -> Option<Split> {
        let lambda = self.p.lambda;
        let parent = g * g / (h + lambda);
        let n = lists[0].len();
        if n < 2 * self.p.min_leaf {
            return None;
        }
        let mut best: Option<Split> = None;
        for (f, list) in lists.iter().enumerate() {
            let (mut gl, mut hl) = (0.0, 0.0);
            for (k, &r) in list.iter().enumerate().take(n - 1) {
                gl += self.grad[r as usize];
                hl += self.hess[r as usize];
                let b = self.data.bin(f, r);
                if b == self.data.bin(f, list[k + 1]) {
                    continue;
                }
                let nl = k + 1;
                if nl < self.p.min_leaf || n - nl < self.p.min_leaf {
                    continue;
                }
                let (gr, hr) = (g - gl, h - hl);
                if hl < self.p.min_child_hessian || hr < self.p.min_child_hessian {
                    continue;
                }
                let gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent;
                if gain > 0.0 && best.as_ref().is_none_or(|s| gain > s.gain) {
                    best = Some(Split { gain, feature: f, bin: b });
                }
            }
        }
        best
    }

    fn pending(&self, node: usize, depth: usize, lists: Vec<Vec<u32>>) -> Pending {
        let (g, h) = lists[0]
            .iter()
            .fold((0.0, 0.0), |(g, h), &r| (g + self.grad[r as usize], h + self.hess[r as usize]));
        let can_split = match self.p.growth {
            Growth::LevelWise => depth < self.p.max_depth,
            Growth::LeafWise => true,
        };
        let split = if can_split { self.best_split(&lists, g, h) } else { None };
        Pending { node, depth, lists, g, h, split }
    }

    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        -g / (h + self.p.lambda)
    }

    fn grow(&self) -> GbTree {
        let mut nodes = vec![GbNode::Leaf { value: 0.0 }];
        let root = self.pending(0, 0, self.data.order.clone());
        let mut frontier = vec![root];
        let mut leaves = 1usize;
        let mut go_left = vec![false; self.data.n];
        loop {
            let pick = match self.p.growth {
                Growth::LevelWise => frontier.iter().position(|p| p.split.is_some()),
                Growth::LeafWise if leaves < self.p.max_leaves => {
                    let mut best: Option<usize> = None;
                    for (i, p) in frontier.iter().enumerate() {
                        if let Some(s) = &p.split {
                            let better = best.is_none_or(|b| {
                                let bs = frontier[b].split.as_ref().unwrap();
                                s.gain > bs.gain || (s.gain == bs.gain && p.node < frontier[b].node)
                            });
                            if better {
                                best = Some(i);
                            }
                        }
                    }
                    best
                }
                Growth::LeafWise => None,
            };
            let Some(i) = pick else { break };
            let pend = frontier.swap_remove(i);
            let split = pend.split.as_ref().unwrap();
            let f = split.feature;
            for &r in &pend.lists[0] {
                go_left[r as usize] = self.data.bin(f, r) <= split.bin;
            }
            let mut left_lists = Vec::with_capacity(pend.lists.len());
            let mut right_lists = Vec::with_capacity(pend.lists.len());
            for list in &pend.lists {
                let (l, r): (Vec<u32>, Vec<u32>) = list.iter().partition(|&&r| go_left[r as usize]);
                left_lists.push(l);
                right_lists.push(r);
            }
            let left = nodes.len();
            let right = left + 1;
            nodes.push(GbNode::Leaf { value: 0.0 });
            nodes.push(GbNode::Leaf { value: 0.0 });
            nodes[pend.node] = GbNode::Split {
                feature: f,
                threshold: self.data.thresholds[f][split.bin as usize],
                left,
                right,
            };
            leaves += 1;
            frontier.push(self.pending(left, pend.depth + 1, left_lists));
            frontier.push(self.pending(right, pend.depth + 1, right_lists));
            if self.p.growth == Growth::LevelWise {
                frontier.sort_by_key(|p| (p.depth, p.node));
            }
        }
        for p in frontier {
            nodes[p.node] = GbNode::Leaf { value: self.leaf_value(p.g, p.h) };
        }
        GbTree { nodes }
    }
}

fn scale_tree(t: &GbTree, s: f64) -> GbTree {
    GbTree {
        nodes: t
            .nodes
            .iter()
            .map(|n| match n {
                GbNode::Leaf { value } => GbNode::Leaf { value: value * s },
                other => other.clone(),
            })
            .collect(),
    }
}

/// Mean softmax cross-entropy of raw scores `f` (row-major `n x c`).
pub fn mean_loss(f: &[f64], y: &[usize], c: usize) -> f64 {
    let n = y.len();
    let mut total = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let row = &f[i * c..(i + 1) * c];
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        total += lse - row[yi];
    }
    total / n as f64
}

const MAX_HALVINGS: usize = 30;

pub fn fit(x: &Matrix, y: &[usize], class_count: usize, params: &GbdtParams) -> GbdtModel {
    let (n, c) = (x.rows(), class_count);
    let data = Binned::new(x, params.max_bins);
    let mut counts = vec![0usize; c];
    for &yi in y {
        counts[yi] += 1;
    }
    // absent classes get a floor so the prior stays finite
    let init: Vec<f64> = counts.iter().map(|&k| ((k as f64).max(0.5) / n as f64).ln()).collect();
    let mut f: Vec<f64> = (0..n).flat_map(|_| init.iter().copied()).collect();
    let mut loss = mean_loss(&f, y, c);
    let mut history = vec![loss];
    let mut rounds = Vec::with_capacity(params.rounds);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut probs = vec![0.0; n * c];
    for _ in 0..params.rounds {
        for i in 0..n {
            let p = softmax(&f[i * c..(i + 1) * c]);
            probs[i * c..(i + 1) * c].copy_from_slice(&p);
        }
        let mut raw_trees = Vec::with_capacity(c);
        for k in 0..c {
            for i in 0..n {
                let p = probs[i * c + k];
                grad[i] = p - if y[i] == k { 1.0 } else { 0.0 };
                hess[i] = (p * (1.0 - p)).max(1e-16);
            }
            raw_trees.push(Grower { data: &data, grad: &grad, hess: &hess, p: params }.grow());
        }
        let raw: Vec<Vec<f64>> = raw_trees.iter().map(|t| (0..n).map(|i| t.predict(x.row(i))).collect()).collect();
        let mut step = params.learning_rate;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = f.clone();
            for (k, r) in raw.iter().enumerate() {
                for i in 0..n {
                    // same product the scaled leaf will hold
                    trial[i * c + k] += r[i] * step;
                }
            }
            let trial_loss = mean_loss(&trial, y, c);
            if trial_loss <= loss {
                let trees = raw_trees.iter().map(|t| scale_tree(t, step)).collect();
                accepted = Some((trees, trial, trial_loss));
                break;
            }
            step /= 2.0;
        }
        let Some((trees, trial, trial_loss)) = accepted else { break };
        f = trial;
        loss = trial_loss;
        history.push(loss);
        rounds.push(trees);
    }
    GbdtModel { init, rounds, loss_history: history }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_respect_bin_order() {
        let v = [3.0, 1.0, 2.0, 2.0, 5.0];
        let t = bin_thresholds(&v, 256);
        assert_eq!(t, vec![1.5, 2.5, 4.0]);
        let coarse = bin_thresholds(&(0..1000).map(|i| i as f64).collect::<Vec<_>>(), 4);
        assert_eq!(coarse, vec![249.5, 499.5, 749.5]);
    }

    #[test]
    fn fits_three_blobs() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..90 {
            let c = i % 3;
            rows.push(vec![c as f64 + (i as f64 * 0.7).sin() * 0.2, (i as f64).cos()]);
            y.push(c);
        }
        let x = Matrix::from_rows(&rows).unwrap();
        for growth in [Growth::LevelWise, Growth::LeafWise] {
            let p = GbdtParams { growth, rounds: 30, ..GbdtParams::default() };
            let m = fit(&x, &y, 3, &p);
            assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0]));
            let correct = rows.iter().zip(&y).filter(|(r, &l)| super::super::argmax(&m.score(r)) == l).count();
            assert_eq!(correct, 90);
            for round in &m.rounds {
                for t in round {
                    match growth {
                        Growth::LevelWise => assert!(t.depth() <= 6),
                        Growth::LeafWise => assert!(t.leaf_count() <= 31),
                    }
                }
            }
        }
    }
}

//! CART classification trees with Gini impurity.
//!
//! Split quality is compared with exact integer arithmetic, so equal-quality
//! candidates are resolved by the documented order alone: lowest feature
//! index first, then lowest threshold.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: Some(32), min_leaf: 1 }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::Config("tree depth must be >= 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { dist: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Class distribution of the leaf reached by `x`; `x[f] <= threshold` goes left.
    pub fn score(&self, x: &[f64]) -> Vec<f64> {
        self.leaf(x).to_vec()
    }

    pub fn leaf(&self, x: &[f64]) -> &[f64] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { dist } => return dist,
                Node::Split { feature, threshold, left, right } => {
                    id = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn rec(t: &Tree, id: usize) -> usize {
            match &t.nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + rec(t, *left).max(rec(t, *right)),
            }
        }
        rec(self, 0)
    }
}

/// Growth settings shared by single trees and forests.
#[derive(Debug, Clone, Copy)]
pub struct GrowConfig {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per node; `None` examines all.
    pub max_features: Option<usize>,
}

/// A grown tree with the impurity decrease it attributes to each feature,
/// weighted by the node's share of the samples.
pub struct Grown {
    pub tree: Tree,
    pub importance: Vec<f64>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    num: u128,
    den: u128,
    left_sq: u64,
    right_sq: u64,
    n_left: u64,
    n_right: u64,
}

fn class_counts(y: &[usize], idx: &[usize], class_count: usize) -> Vec<u64> {
    let mut c = vec![0u64; class_count];
    for &i in idx {
        c[y[i]] += 1;
    }
    c
}

fn best_split_for_feature(
    x: &Matrix,
    y: &[usize],
    idx: &[usize],
    feature: usize,
    totals: &[u64],
    min_leaf: usize,
    buf: &mut Vec<(f64, usize)>,
) -> Option<Candidate> {
    buf.clear();
    buf.extend(idx.iter().map(|&i| (x.get(i, feature), y[i])));
    buf.sort_by(|a, b| a.0.total_cmp(&b.0));
    if buf[0].0 == buf[buf.len() - 1].0 {
        return None;
    }
    let n = buf.len() as u64;
    let mut left = vec![0u64; totals.len()];
    let mut right = totals.to_vec();
    let mut left_sq = 0u64;
    let mut right_sq: u64 = totals.iter().map(|c| c * c).sum();
    let mut best: Option<Candidate> = None;
    for p in 0..buf.len() - 1 {
        let k = buf[p].1;
        left_sq += 2 * left[k] + 1;
        right_sq -= 2 * right[k] - 1;
        left[k] += 1;
        right[k] -= 1;
        let (v, next) = (buf[p].0, buf[p + 1].0);
        if v == next {
            continue;
        }
        let n_left = p as u64 + 1;
        let n_right = n - n_left;
        if (n_left as usize) < min_leaf || (n_right as usize) < min_leaf {
            continue;
        }
        // maximize left_sq / n_left + right_sq / n_right
        let num = left_sq as u128 * n_right as u128 + right_sq as u128 * n_left as u128;
        let den = n_left as u128 * n_right as u128;
        let better = match &best {
            None => true,
            Some(b) => num * b.den > b.num * den,
        };
        if better {
            let mid = v + (next - v) / 2.0;
            let threshold = if mid < next { mid } else { v };
            best = Some(Candidate { feature, threshold, num, den, left_sq, right_sq, n_left, n_right });
        }
    }
    best
}

fn sample_features(d: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut all: Vec<usize> = (0..d).collect();
    for i in 0..m.min(d) {
        let j = rng.random_range(i..d);
        all.swap(i, j);
    }
    let mut chosen = all[..m.min(d)].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Grow a tree on the rows listed in `sample` (duplicates act as weights).
pub fn grow(
    x: &Matrix,
    y: &[usize],
    class_count: usize,
    sample: &[usize],
    cfg: GrowConfig,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Grown {
    let d = x.cols();
    let total = sample.len() as f64;
    let mut importance = vec![0.0; d];
    let mut nodes: Vec<Node> = vec![Node::Leaf { dist: vec![] }];
    let mut stack = vec![(0usize, sample.to_vec(), 0usize)];
    let mut buf = Vec::with_capacity(sample.len());
    let all_features: Vec<usize> = (0..d).collect();
    while let Some((id, idx, depth)) = stack.pop() {
        let counts = class_counts(y, &idx, class_count);
        let n = idx.len() as u64;
        let leaf = Node::Leaf { dist: counts.iter().map(|&c| c as f64 / n as f64).collect() };
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || cfg.max_depth.is_some_and(|m| depth >= m) || idx.len() < 2 * cfg.min_leaf {
            nodes[id] = leaf;
            continue;
        }
        let features = match (cfg.max_features, rng.as_deref_mut()) {
            (Some(m), Some(r)) if m < d => sample_features(d, m, r),
            _ => all_features.clone(),
        };
        let mut best: Option<Candidate> = None;
        for &f in &features {
            if let Some(c) = best_split_for_feature(x, y, &idx, f, &counts, cfg.min_leaf, &mut buf) {
                let better = match &best {
                    None => true,
                    Some(b) => c.num * b.den > b.num * c.den,
                };
                if better {
                    best = Some(c);
                }
            }
        }
        let Some(best) = best else {
            nodes[id] = leaf;
            continue;
        };
        let node_sq: u64 = counts.iter().map(|c| c * c).sum();
        let decrease = best.left_sq as f64 / best.n_left as f64 + best.right_sq as f64 / best.n_right as f64
            - node_sq as f64 / n as f64;
        importance[best.feature] += decrease.max(0.0) / total;
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| x.get(i, best.feature) <= best.threshold);
        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf { dist: vec![] });
        nodes.push(Node::Leaf { dist: vec![] });
        nodes[id] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        stack.push((right, right_idx, depth + 1));
        stack.push((left, left_idx, depth + 1));
    }
    Grown { tree: Tree { nodes }, importance }
}

pub fn fit(x: &Matrix, y: &[usize], class_count: usize, params: &TreeParams) -> Tree {
    let sample: Vec<usize> = (0..x.rows()).collect();
    let cfg = GrowConfig { max_depth: params.max_depth, min_leaf: params.min_leaf, max_features: None };
    grow(x, y, class_count, &sample, cfg, None).tree
}

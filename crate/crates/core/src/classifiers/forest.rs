//! Random forests: bootstrap-aggregated CART trees with per-node feature
//! subsampling and soft voting.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::argmax;
use super::tree::{grow, GrowConfig, Tree};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features examined per split; `None` means `round(sqrt(d))`.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 200, max_features: None, max_depth: None, min_leaf: 1 }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("forest needs at least one tree".into()));
        }
        if self.max_features == Some(0) {
            return Err(Error::Config("max_features must be >= 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("tree depth must be >= 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be >= 1".into()));
        }
        Ok(())
    }

    pub fn features_per_split(&self, d: usize) -> usize {
        self.max_features.unwrap_or_else(|| ((d as f64).sqrt().round() as usize).max(1)).min(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    /// `None` when no row was ever left out of a bootstrap sample.
    pub oob_accuracy: Option<f64>,
}

impl ForestModel {
    pub fn score(&self, x: &[f64], class_count: usize) -> Vec<f64> {
        let mut acc = vec![0.0; class_count];
        for t in &self.trees {
            for (a, p) in acc.iter_mut().zip(t.leaf(x)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

/// A trained forest together with its mean impurity-decrease importances.
pub struct FittedForest {
    pub model: ForestModel,
    /// Per feature, the Gini decrease averaged over trees.
    pub importance: Vec<f64>,
    /// Bootstrap row indices of each tree.
    pub bags: Vec<Vec<usize>>,
}

pub fn fit(x: &Matrix, y: &[usize], class_count: usize, params: &ForestParams, seed: u64) -> ForestModel {
    fit_with_importance(x, y, class_count, params, seed).model
}

pub fn fit_with_importance(
    x: &Matrix,
    y: &[usize],
    class_count: usize,
    params: &ForestParams,
    seed: u64,
) -> FittedForest {
    let n = x.rows();
    let d = x.cols();
    let cfg = GrowConfig {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        max_features: Some(params.features_per_split(d)),
    };
    let grown: Vec<(Tree, Vec<f64>, Vec<usize>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, t as u64);
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let g = grow(x, y, class_count, &sample, cfg, Some(&mut rng));
            (g.tree, g.importance, sample)
        })
        .collect();

    let mut importance = vec![0.0; d];
    let mut oob = vec![vec![0.0; class_count]; n];
    let mut oob_seen = vec![false; n];
    for (tree, imp, sample) in &grown {
        let mut in_bag = vec![false; n];
        for &i in sample {
            in_bag[i] = true;
        }
        for (a, v) in importance.iter_mut().zip(imp) {
            *a += v;
        }
        for i in (0..n).filter(|&i| !in_bag[i]) {
            oob_seen[i] = true;
            for (a, p) in oob[i].iter_mut().zip(tree.leaf(x.row(i))) {
                *a += p;
            }
        }
    }
    let t = params.n_trees as f64;
    importance.iter_mut().for_each(|v| *v /= t);
    let seen = oob_seen.iter().filter(|&&s| s).count();
    let oob_accuracy = (seen > 0).then(|| {
        let correct = (0..n).filter(|&i| oob_seen[i] && argmax(&oob[i]) == y[i]).count();
        correct as f64 / seen as f64
    });
    let (trees, bags): (Vec<Tree>, Vec<Vec<usize>>) = grown.into_iter().map(|g| (g.0, g.2)).unzip();
    FittedForest { model: ForestModel { trees, oob_accuracy }, importance, bags }
}

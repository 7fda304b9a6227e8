//! Feature selection: random-forest importance ranking with top-k
//! truncation, and greedy forward wrapper selection.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::forest::{fit_with_importance, ForestParams};
use crate::classifiers::{train, ClassifierSpec};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::rng_for;

/// Rounds without improvement before forward selection stops.
pub const DEFAULT_PATIENCE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    EmbeddedRf,
    WrapperForward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: SelectionMethod,
    /// Embedded: the feature count `d`. Wrapper: length of the best prefix.
    pub k: usize,
    pub ranked_indices: Vec<usize>,
    /// Embedded: importance per feature index. Wrapper: validation
    /// accuracy after each round.
    pub scores: Vec<f64>,
}

impl SelectionResult {
    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec_pretty(self)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let r: SelectionResult = serde_json::from_slice(bytes)?;
        let mut seen = std::collections::HashSet::new();
        if !r.ranked_indices.iter().all(|&i| seen.insert(i)) {
            return Err(Error::Format("ranked_indices repeats an index".into()));
        }
        Ok(r)
    }
}

fn check_labels(x: &Matrix, labels: &[usize], class_count: usize) -> Result<()> {
    if x.rows() != labels.len() {
        return Err(Error::Validation(format!("{} feature rows but {} labels", x.rows(), labels.len())));
    }
    if x.rows() < 2 {
        return Err(Error::Training("need at least two samples".into()));
    }
    if x.cols() == 0 {
        return Err(Error::Validation("feature dimension is zero".into()));
    }
    x.ensure_finite()?;
    if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
        return Err(Error::Validation(format!("label {bad} outside [0, {class_count})")));
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::Training("selection needs at least two classes".into()));
    }
    Ok(())
}

/// Rank features by mean Gini decrease over a random forest.
pub fn rank_embedded_rf(x: &Matrix, labels: &[usize], class_count: usize, trees: usize, seed: u64) -> Result<SelectionResult> {
    check_labels(x, labels, class_count)?;
    let params = ForestParams { n_trees: trees, ..ForestParams::default() };
    params.validate()?;
    let fitted = fit_with_importance(x, labels, class_count, &params, seed);
    Ok(ranking(fitted.importance))
}

pub(crate) fn ranking(scores: Vec<f64>) -> SelectionResult {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    SelectionResult { method: SelectionMethod::EmbeddedRf, k: scores.len(), ranked_indices: order, scores }
}

/// The first `k` ranked indices, sorted ascending.
pub fn select_top_k(res: &SelectionResult, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > res.ranked_indices.len() {
        return Err(Error::Config(format!("k = {k} outside [1, {}]", res.ranked_indices.len())));
    }
    let mut out = res.ranked_indices[..k].to_vec();
    out.sort_unstable();
    Ok(out)
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    pred.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / truth.len() as f64
}

/// Training and validation rows for forward selection.
pub struct WrapperData<'a> {
    pub train_x: &'a Matrix,
    pub train_y: &'a [usize],
    pub val_x: &'a Matrix,
    pub val_y: &'a [usize],
    pub class_count: usize,
}

/// Greedy forward selection. Each round adds the candidate whose model
/// scores highest on the validation rows, lowest index on ties, and the
/// search stops at `max_k` features or after `patience` rounds without a
/// new best. `k` is the shortest prefix reaching the best accuracy.
pub fn wrapper_forward(
    data: &WrapperData<'_>,
    spec: &ClassifierSpec,
    max_k: usize,
    patience: usize,
    seed: u64,
) -> Result<SelectionResult> {
    let d = data.train_x.cols();
    if max_k == 0 || max_k > d {
        return Err(Error::Config(format!("max_k = {max_k} outside [1, {d}]")));
    }
    if patience == 0 {
        return Err(Error::Config("patience must be >= 1".into()));
    }
    if data.val_x.cols() != d {
        return Err(Error::Validation("train and validation dimensions differ".into()));
    }
    if data.val_x.rows() != data.val_y.len() || data.val_y.is_empty() {
        return Err(Error::Validation("validation rows and labels differ in length".into()));
    }
    check_labels(data.train_x, data.train_y, data.class_count)?;
    spec.validate()?;

    let mut chosen: Vec<usize> = Vec::new();
    let mut scores = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut best_len = 0;
    let mut stale = 0;
    while chosen.len() < max_k && stale < patience {
        let candidates: Vec<usize> = (0..d).filter(|j| !chosen.contains(j)).collect();
        let evaluated: Vec<(usize, f64)> = candidates
            .par_iter()
            .map(|&j| {
                let mut cols = chosen.clone();
                cols.push(j);
                let model = train(spec, &data.train_x.select_cols(&cols), data.train_y, data.class_count, seed)?;
                let pred = model.predict_matrix(&data.val_x.select_cols(&cols))?;
                Ok((j, accuracy(&pred, data.val_y)))
            })
            .collect::<Result<_>>()?;
        let (pick, acc) = evaluated.iter().copied().fold((usize::MAX, f64::NEG_INFINITY), |a, c| if c.1 > a.1 { c } else { a });
        chosen.push(pick);
        scores.push(acc);
        if acc > best {
            best = acc;
            best_len = chosen.len();
            stale = 0;
        } else {
            stale += 1;
        }
    }
    Ok(SelectionResult { method: SelectionMethod::WrapperForward, k: best_len, ranked_indices: chosen, scores })
}

/// Gaussian features where only `informative` randomly placed columns
/// depend on the class: each such column has mean `±separation/2` per
/// class, the sign drawn at random. All columns have unit variance.
pub struct Benchmark {
    pub x: Matrix,
    pub labels: Vec<usize>,
    pub informative: Vec<usize>,
}

pub fn informative_benchmark(n: usize, d: usize, informative: usize, class_count: usize, separation: f64, seed: u64) -> Benchmark {
    assert!(informative <= d && class_count >= 2);
    let mut rng = rng_for(seed, 0);
    let mut cols: Vec<usize> = (0..d).collect();
    cols.shuffle(&mut rng);
    let mut chosen = cols[..informative].to_vec();
    chosen.sort_unstable();
    let mut means = vec![vec![0.0; d]; class_count];
    for &j in &chosen {
        // Every informative column separates at least two classes.
        loop {
            let signs: Vec<f64> = (0..class_count).map(|_| if rng.random::<bool>() { 0.5 } else { -0.5 }).collect();
            if signs.iter().any(|&s| s != signs[0]) {
                for c in 0..class_count {
                    means[c][j] = signs[c] * separation;
                }
                break;
            }
        }
    }
    let labels: Vec<usize> = (0..n).map(|i| i % class_count).collect();
    let mut data = Vec::with_capacity(n * d);
    for &c in &labels {
        for j in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            data.push(means[c][j] + z);
        }
    }
    Benchmark { x: Matrix::new(n, d, data).expect("shape"), labels, informative: chosen }
}

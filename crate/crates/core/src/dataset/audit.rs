//! Label audit by out-of-fold disagreement: every sample is predicted by a
//! model that never saw it, and samples whose prediction contradicts the
//! stored label are flagged for review.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::{LabeledDataset, SampleRef};
use crate::classifiers::{train, ClassifierSpec};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditFlag {
    pub index: usize,
    pub stored: usize,
    pub predicted: usize,
    /// Out-of-fold score of the predicted class.
    pub confidence: f64,
}

/// Stratified fold id per sample: each class is shuffled then dealt round robin.
fn assign_folds(labels: &[usize], class_count: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut fold = vec![0; labels.len()];
    for c in 0..class_count {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng_for(seed, c as u64));
        for (pos, i) in members.into_iter().enumerate() {
            fold[i] = pos % k;
        }
    }
    fold
}

pub fn audit_features(
    x: &Matrix,
    labels: &[usize],
    class_count: usize,
    k_folds: usize,
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<Vec<AuditFlag>> {
    if k_folds < 2 {
        return Err(Error::Config(format!("audit needs at least 2 folds, got {k_folds}")));
    }
    if x.rows() != labels.len() {
        return Err(Error::Validation("feature rows and labels differ in length".into()));
    }
    let folds = assign_folds(labels, class_count, k_folds, seed);
    let mut flags = Vec::new();
    for f in 0..k_folds {
        let train_idx: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] != f).collect();
        let held: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] == f).collect();
        if held.is_empty() {
            continue;
        }
        let train_labels: Vec<usize> = train_idx.iter().map(|&i| labels[i]).collect();
        for c in 0..class_count {
            if labels.contains(&c) && !train_labels.contains(&c) {
                return Err(Error::Stratification(format!("class {c} is absent from the training part of fold {f}")));
            }
        }
        let model = train(spec, &x.select_rows(&train_idx), &train_labels, class_count, seed)?;
        for i in held {
            let scores = model.score(x.row(i))?;
            let predicted = crate::classifiers::argmax(&scores);
            if predicted != labels[i] {
                flags.push(AuditFlag { index: i, stored: labels[i], predicted, confidence: scores[predicted] });
            }
        }
    }
    flags.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then(a.index.cmp(&b.index)));
    Ok(flags)
}

/// Audit a dataset given one feature row per sample (in dataset order).
pub fn audit_labels(
    ds: &LabeledDataset,
    features: &Matrix,
    k_folds: usize,
    spec: &ClassifierSpec,
) -> Result<Vec<(SampleRef, usize, f64)>> {
    let flags = audit_features(features, &ds.labels(), ds.class_count(), k_folds, spec, ds.seed)?;
    Ok(flags.into_iter().map(|f| (ds.samples[f.index].clone(), f.predicted, f.confidence)).collect())
}

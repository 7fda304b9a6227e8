//! Confusion matrices, macro and weighted precision/recall/F1, and
//! wall-clock timing of pipeline stages.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes()).map(|i| self.counts[i][i]).sum()
    }
}

pub fn confusion(y_true: &[usize], y_pred: &[usize], c: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Validation(format!("{} true labels but {} predictions", y_true.len(), y_pred.len())));
    }
    let mut counts = vec![vec![0u64; c]; c];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= c || p >= c {
            return Err(Error::Validation(format!("label pair ({t}, {p}) outside [0, {c})")));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    Macro,
    Weighted,
}

/// Fractions in [0, 1], or percentages once rounded by [`summarize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn per_class(m: &ConfusionMatrix) -> Vec<ClassScores> {
    let c = m.classes();
    (0..c)
        .map(|k| {
            let tp = m.counts[k][k];
            let support: u64 = m.counts[k].iter().sum();
            let predicted: u64 = (0..c).map(|t| m.counts[t][k]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            ClassScores { precision, recall, f1, support }
        })
        .collect()
}

/// Unrounded fractions.
pub fn scores(m: &ConfusionMatrix, averaging: Averaging) -> Result<Summary> {
    let total = m.total();
    if total == 0 {
        return Err(Error::Validation("confusion matrix is empty".into()));
    }
    let per = per_class(m);
    let weight = |s: &ClassScores| match averaging {
        Averaging::Macro => 1.0 / per.len() as f64,
        Averaging::Weighted => s.support as f64 / total as f64,
    };
    let avg = |f: fn(&ClassScores) -> f64| per.iter().map(|s| weight(s) * f(s)).sum::<f64>();
    Ok(Summary {
        accuracy: ratio(m.trace(), total),
        precision: avg(|s| s.precision),
        recall: avg(|s| s.recall),
        f1: avg(|s| s.f1),
    })
}

fn percent(v: f64) -> f64 {
    (v * 10000.0).round() / 100.0
}

/// Percentages rounded to two decimals.
pub fn summarize(m: &ConfusionMatrix, averaging: Averaging) -> Result<Summary> {
    let s = scores(m, averaging)?;
    Ok(Summary { accuracy: percent(s.accuracy), precision: percent(s.precision), recall: percent(s.recall), f1: percent(s.f1) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(rename = "macro")]
    pub macro_avg: Summary,
    pub weighted: Summary,
}

pub fn evaluate(m: &ConfusionMatrix) -> Result<Metrics> {
    Ok(Metrics { macro_avg: summarize(m, Averaging::Macro)?, weighted: summarize(m, Averaging::Weighted)? })
}

/// Training cost and per-sample inference latency, split into feature
/// extraction and classifier time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub train_s: f64,
    pub fe_s: f64,
    pub fe_ms: f64,
    pub clf_ms: f64,
    pub infer_ms_per_sample: f64,
    pub batch_size: usize,
    pub n_test: usize,
}

impl TimingRecord {
    pub fn new(train_s: f64, fe_s: f64, fe_ms: f64, clf_ms: f64, batch_size: usize, n_test: usize) -> Self {
        Self { train_s, fe_s, fe_ms, clf_ms, infer_ms_per_sample: fe_ms + clf_ms, batch_size, n_test }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    /// Median wall-clock seconds of one full pass.
    pub median_s: f64,
    pub per_sample_ms: f64,
}

/// Run `stage` once to warm up, then `reps` more times; report the median.
pub fn time_pipeline<F: FnMut()>(mut stage: F, reps: usize, n_samples: usize) -> Result<StageTiming> {
    if reps < 3 {
        return Err(Error::Config(format!("timing needs at least 3 repetitions, got {reps}")));
    }
    if n_samples == 0 {
        return Err(Error::Config("timing needs at least one sample".into()));
    }
    stage();
    let mut runs: Vec<f64> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            stage();
            t.elapsed().as_secs_f64()
        })
        .collect();
    runs.sort_by(f64::total_cmp);
    let median_s = if reps % 2 == 1 { runs[reps / 2] } else { 0.5 * (runs[reps / 2 - 1] + runs[reps / 2]) };
    Ok(StageTiming { median_s, per_sample_ms: median_s * 1000.0 / n_samples as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_confusion() {
        let m = confusion(&[0, 0, 1], &[0, 1, 1], 2).unwrap();
        assert_eq!(m.counts, vec![vec![1, 1], vec![0, 1]]);
        assert!(matches!(confusion(&[0, 2], &[0, 1], 2), Err(Error::Validation(_))));
        assert!(matches!(confusion(&[0], &[0, 1], 2), Err(Error::Validation(_))));
    }

    #[test]
    fn binary_example() {
        let m = ConfusionMatrix { counts: vec![vec![50, 10], vec![5, 35]] };
        let s = summarize(&m, Averaging::Macro).unwrap();
        assert_eq!(s.accuracy, 85.0);
        assert_eq!(s.precision, 84.34);
    }

    #[test]
    fn perfect_is_hundred() {
        let m = confusion(&[0, 1, 2, 2], &[0, 1, 2, 2], 3).unwrap();
        for a in [Averaging::Macro, Averaging::Weighted] {
            let s = summarize(&m, a).unwrap();
            assert_eq!([s.accuracy, s.precision, s.recall, s.f1], [100.0; 4]);
        }
    }

    #[test]
    fn never_predicted_class_scores_zero() {
        let m = confusion(&[0, 1, 1], &[0, 0, 0], 2).unwrap();
        let per = per_class(&m);
        assert_eq!(per[1].precision, 0.0);
        assert_eq!(per[1].f1, 0.0);
        assert!(summarize(&m, Averaging::Macro).unwrap().precision.is_finite());
    }

    #[test]
    fn empty_rejected() {
        let m = confusion(&[], &[], 3).unwrap();
        assert!(matches!(summarize(&m, Averaging::Macro), Err(Error::Validation(_))));
    }

    #[test]
    fn timing_needs_three_reps() {
        assert!(time_pipeline(|| {}, 2, 1).is_err());
        let mut calls = 0;
        time_pipeline(|| calls += 1, 3, 1).unwrap();
        assert_eq!(calls, 4);
    }

    #[test]
    fn decomposition_adds_up() {
        let t = TimingRecord::new(1.0, 2.0, 0.3, 0.07, 32, 10);
        assert_eq!(t.infer_ms_per_sample, t.fe_ms + t.clf_ms);
    }
}

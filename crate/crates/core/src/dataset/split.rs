use rand::seq::SliceRandom;

use super::{LabeledDataset, Split};
use crate::error::{Error, Result};
use crate::rng::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.8, val: 0.1, test: 0.1 }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Config(format!("split ratios must be non-negative: {self:?}")));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios must sum to 1: {self:?}")));
        }
        Ok(())
    }

    /// Per-class (train, val, test) counts by largest remainder: every count
    /// is the floor of its target plus at most one, leftovers go to the
    /// largest fractional parts with train winning ties, then val.
    pub fn allocate(&self, n: usize) -> [usize; 3] {
        let targets = [self.train * n as f64, self.val * n as f64, self.test * n as f64];
        let mut counts = targets.map(|t| t.floor() as usize);
        let mut left = n.saturating_sub(counts.iter().sum());
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let fa = targets[a] - targets[a].floor();
            let fb = targets[b] - targets[b].floor();
            fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        counts
    }
}

/// Stratified, seeded assignment of every sample to train/val/test.
pub fn split(ds: &LabeledDataset, ratios: SplitRatios, seed: u64) -> Result<LabeledDataset> {
    ratios.validate()?;
    let nonzero = [ratios.train, ratios.val, ratios.test].iter().filter(|r| **r > 0.0).count();
    let mut out = ds.clone();
    out.seed = seed;
    for class_id in 0..ds.class_count() {
        let mut members: Vec<usize> =
            ds.samples.iter().enumerate().filter(|(_, s)| s.class_id == class_id).map(|(i, _)| i).collect();
        if members.len() < nonzero {
            return Err(Error::Stratification(format!(
                "class {:?} has {} samples but {nonzero} non-empty splits were requested",
                ds.class_names[class_id],
                members.len()
            )));
        }
        members.shuffle(&mut rng_for(seed, class_id as u64));
        let [n_train, n_val, _] = ratios.allocate(members.len());
        for (pos, &i) in members.iter().enumerate() {
            out.samples[i].split = if pos < n_train {
                Split::Train
            } else if pos < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }
    Ok(out)
}

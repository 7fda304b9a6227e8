use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

impl KnnParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("knn k must be >= 1".into()));
        }
        Ok(())
    }
}

/// Stored z-scored training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub dim: usize,
    pub points: Vec<f64>,
    pub labels: Vec<usize>,
}

pub fn fit(x: &Matrix, labels: &[usize], params: &KnnParams) -> KnnModel {
    KnnModel { k: params.k, dim: x.cols(), points: x.as_slice().to_vec(), labels: labels.to_vec() }
}

impl KnnModel {
    /// Indices of the k nearest stored points by Euclidean distance; equal
    /// distances keep the lower training index first.
    pub fn neighbours(&self, x: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .points
            .chunks_exact(self.dim)
            .enumerate()
            .map(|(i, p)| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k.min(dist.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
            dist.truncate(k);
        }
        dist.sort_by(cmp);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    /// Vote fractions over the k neighbours.
    pub fn score(&self, x: &[f64], class_count: usize) -> Vec<f64> {
        let nn = self.neighbours(x);
        let mut votes = vec![0.0; class_count];
        for &i in &nn {
            votes[self.labels[i]] += 1.0;
        }
        let k = nn.len() as f64;
        votes.into_iter().map(|v| v / k).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vote_fraction() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0], vec![50.0]]).unwrap();
        let m = fit(&x, &[0, 0, 0, 1, 1, 1], &KnnParams { k: 5 });
        let s = m.score(&[2.0], 2);
        assert_eq!(s, vec![0.6, 0.4]);
    }
}

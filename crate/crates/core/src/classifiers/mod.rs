//! Classical learners trained on feature matrices: multinomial logistic
//! regression (cross-entropy or focal loss), k-nearest neighbours,
//! one-vs-rest RBF SVM trained by SMO, CART trees, random forests and
//! histogram gradient boosting with level-wise or leaf-wise growth.
//!
//! Every model z-scores its inputs with statistics from the training rows
//! and stores the scaler alongside its parameters.

pub mod focal;
pub mod forest;
pub mod gbdt;
pub mod knn;
pub mod logistic;
mod scaler;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use focal::focal_loss;
pub use forest::ForestParams;
pub use gbdt::{GbdtParams, Growth};
pub use knn::KnnParams;
pub use logistic::{LogisticParams, Loss};
pub use scaler::Scaler;
pub use svm::{Kernel, SvmParams};
pub use tree::TreeParams;

/// Version tag written into every serialized model.
pub const MODEL_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Logistic(LogisticParams),
    Knn(KnnParams),
    Svm(SvmParams),
    Dtree(TreeParams),
    Rforest(ForestParams),
    Gbdt(GbdtParams),
}

impl ClassifierSpec {
    /// Default hyperparameters for a family name.
    pub fn from_family(name: &str) -> Result<Self> {
        Ok(match name {
            "logistic" => ClassifierSpec::Logistic(LogisticParams::default()),
            "knn" => ClassifierSpec::Knn(KnnParams::default()),
            "svm" => ClassifierSpec::Svm(SvmParams::default()),
            "dtree" => ClassifierSpec::Dtree(TreeParams::default()),
            "rforest" => ClassifierSpec::Rforest(ForestParams::default()),
            "gbdt" => ClassifierSpec::Gbdt(GbdtParams::default()),
            "gbdt_leaf" => ClassifierSpec::Gbdt(GbdtParams { growth: Growth::LeafWise, ..GbdtParams::default() }),
            other => return Err(Error::Config(format!("unknown classifier family {other:?}"))),
        })
    }

    pub fn family(&self) -> &'static str {
        match self {
            ClassifierSpec::Logistic(_) => "logistic",
            ClassifierSpec::Knn(_) => "knn",
            ClassifierSpec::Svm(_) => "svm",
            ClassifierSpec::Dtree(_) => "dtree",
            ClassifierSpec::Rforest(_) => "rforest",
            ClassifierSpec::Gbdt(_) => "gbdt",
        }
    }

    /// Short label used in reports, e.g. `gbdt_leaf_wise` or `logistic_focal`.
    pub fn label(&self) -> String {
        match self {
            ClassifierSpec::Logistic(p) => match p.loss {
                Loss::CrossEntropy => "logistic".into(),
                Loss::Focal { .. } => "logistic_focal".into(),
            },
            ClassifierSpec::Gbdt(p) => match p.growth {
                Growth::LevelWise => "gbdt_level_wise".into(),
                Growth::LeafWise => "gbdt_leaf_wise".into(),
            },
            other => other.family().into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClassifierSpec::Logistic(p) => p.validate(),
            ClassifierSpec::Knn(p) => p.validate(),
            ClassifierSpec::Svm(p) => p.validate(),
            ClassifierSpec::Dtree(p) => p.validate(),
            ClassifierSpec::Rforest(p) => p.validate(),
            ClassifierSpec::Gbdt(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelParams {
    Logistic(logistic::LogisticModel),
    Knn(knn::KnnModel),
    Svm(svm::SvmModel),
    Dtree(tree::Tree),
    Rforest(forest::ForestModel),
    Gbdt(gbdt::GbdtModel),
}

impl ModelParams {
    fn family(&self) -> &'static str {
        match self {
            ModelParams::Logistic(_) => "logistic",
            ModelParams::Knn(_) => "knn",
            ModelParams::Svm(_) => "svm",
            ModelParams::Dtree(_) => "dtree",
            ModelParams::Rforest(_) => "rforest",
            ModelParams::Gbdt(_) => "gbdt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub model_schema: u32,
    pub spec: ClassifierSpec,
    pub class_count: usize,
    pub feature_dim: usize,
    pub scaler: Scaler,
    pub params: ModelParams,
}

fn validate_training_data(x: &Matrix, labels: &[usize], class_count: usize) -> Result<()> {
    if x.rows() != labels.len() {
        return Err(Error::Validation(format!("{} feature rows but {} labels", x.rows(), labels.len())));
    }
    if x.rows() < 2 {
        return Err(Error::Training("need at least two training samples".into()));
    }
    if x.cols() == 0 {
        return Err(Error::Validation("feature dimension is zero".into()));
    }
    x.ensure_finite()?;
    if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
        return Err(Error::Validation(format!("label {bad} outside [0, {class_count})")));
    }
    let first = labels[0];
    if labels.iter().all(|&l| l == first) {
        return Err(Error::Training("training labels contain a single class".into()));
    }
    Ok(())
}

/// Fit a model of the given family. Identical inputs and seed give a
/// bit-identical model.
pub fn train(spec: &ClassifierSpec, x: &Matrix, labels: &[usize], class_count: usize, seed: u64) -> Result<TrainedModel> {
    spec.validate()?;
    validate_training_data(x, labels, class_count)?;
    let scaler = Scaler::fit(x);
    let z = scaler.transform_matrix(x);
    let params = match spec {
        ClassifierSpec::Logistic(p) => ModelParams::Logistic(logistic::fit(&z, labels, class_count, p)?),
        ClassifierSpec::Knn(p) => ModelParams::Knn(knn::fit(&z, labels, p)),
        ClassifierSpec::Svm(p) => ModelParams::Svm(svm::fit(&z, labels, class_count, p)?),
        ClassifierSpec::Dtree(p) => ModelParams::Dtree(tree::fit(&z, labels, class_count, p)),
        ClassifierSpec::Rforest(p) => ModelParams::Rforest(forest::fit(&z, labels, class_count, p, seed)),
        ClassifierSpec::Gbdt(p) => ModelParams::Gbdt(gbdt::fit(&z, labels, class_count, p)),
    };
    Ok(TrainedModel { model_schema: MODEL_SCHEMA, spec: spec.clone(), class_count, feature_dim: x.cols(), scaler, params })
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in v.iter().enumerate() {
        if s > v[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

impl TrainedModel {
    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_dim {
            return Err(Error::Validation(format!("expected {} features, got {}", self.feature_dim, x.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite feature value".into()));
        }
        Ok(())
    }

    /// Per-class scores summing to one: class probabilities for the
    /// probabilistic families, softmax of margins for the SVM.
    pub fn score(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let z = self.scaler.transform(x);
        Ok(match &self.params {
            ModelParams::Logistic(m) => m.score(&z),
            ModelParams::Knn(m) => m.score(&z, self.class_count),
            ModelParams::Svm(m) => m.score(&z),
            ModelParams::Dtree(m) => m.score(&z),
            ModelParams::Rforest(m) => m.score(&z, self.class_count),
            ModelParams::Gbdt(m) => m.score(&z),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.score(x)?))
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Result<Vec<usize>> {
        x.iter_rows().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(self)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_slice(bytes)?;
        match value.get("model_schema").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_SCHEMA as u64 => {}
            other => return Err(Error::Format(format!("unsupported model_schema {other:?}"))),
        }
        let model: TrainedModel = serde_json::from_value(value)?;
        if model.spec.family() != model.params.family() {
            return Err(Error::Format(format!(
                "spec family {} does not match parameters for {}",
                model.spec.family(),
                model.params.family()
            )));
        }
        if model.scaler.dim() != model.feature_dim {
            return Err(Error::Format("scaler dimension does not match feature_dim".into()));
        }
        Ok(model)
    }

    /// Out-of-bag accuracy, for forests.
    pub fn oob_accuracy(&self) -> Option<f64> {
        match &self.params {
            ModelParams::Rforest(m) => m.oob_accuracy,
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> (Matrix, Vec<usize>) {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        (x, vec![0, 1, 1, 0])
    }

    #[test]
    fn single_class_is_training_error() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let err = train(&ClassifierSpec::from_family("knn").unwrap(), &x, &[1, 1], 2, 0).unwrap_err();
        assert!(matches!(err, Error::Training(_)));
    }

    #[test]
    fn non_finite_feature_is_validation_error() {
        let x = Matrix::from_rows(&[vec![0.0], vec![f64::NAN]]).unwrap();
        let err = train(&ClassifierSpec::from_family("dtree").unwrap(), &x, &[0, 1], 2, 0).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn label_out_of_range_rejected() {
        let (x, _) = xor();
        let err = train(&ClassifierSpec::from_family("dtree").unwrap(), &x, &[0, 1, 2, 0], 2, 0).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn bad_hyperparameters_rejected() {
        let (x, y) = xor();
        let spec = ClassifierSpec::Knn(KnnParams { k: 0 });
        assert!(matches!(train(&spec, &x, &y, 2, 0), Err(Error::Config(_))));
        let spec = ClassifierSpec::Logistic(LogisticParams {
            loss: Loss::Focal { gamma: -1.0, alpha: 0.25 },
            ..LogisticParams::default()
        });
        assert!(matches!(train(&spec, &x, &y, 2, 0), Err(Error::Config(_))));
        let spec = ClassifierSpec::Svm(SvmParams { c: 0.0, ..SvmParams::default() });
        assert!(matches!(train(&spec, &x, &y, 2, 0), Err(Error::Config(_))));
    }

    #[test]
    fn xor_tree_depth_two() {
        let (x, y) = xor();
        let spec = ClassifierSpec::Dtree(TreeParams { max_depth: Some(2), min_leaf: 1 });
        let m = train(&spec, &x, &y, 2, 0).unwrap();
        assert_eq!(m.predict_matrix(&x).unwrap(), y);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let (x, y) = xor();
        let m = train(&ClassifierSpec::from_family("knn").unwrap(), &x, &y, 2, 0).unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::Validation(_))));
    }

    #[test]
    fn argmax_ties_take_lowest() {
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
    }

    #[test]
    fn schema_and_family_checked_on_load() {
        let (x, y) = xor();
        let m = train(&ClassifierSpec::from_family("dtree").unwrap(), &x, &y, 2, 0).unwrap();
        let mut v: serde_json::Value = serde_json::from_slice(&m.to_json().unwrap()).unwrap();
        v["model_schema"] = 2.into();
        assert!(matches!(TrainedModel::from_json(&serde_json::to_vec(&v).unwrap()), Err(Error::Format(_))));
        v["model_schema"] = 1.into();
        v["spec"]["family"] = "knn".into();
        v["spec"]["k"] = 3.into();
        assert!(matches!(TrainedModel::from_json(&serde_json::to_vec(&v).unwrap()), Err(Error::Format(_))));
        let bytes = m.to_json().unwrap();
        assert!(matches!(TrainedModel::from_json(&bytes[..bytes.len() / 2]), Err(Error::Format(_))));
    }
}

//! Experiment grids: feature preparation, per-cell selection and training,
//! evaluation on the held-out split, timing decomposition and reports.

pub mod synth;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierSpec, TrainedModel};
use crate::dataset::{self, LabeledDataset, SampleRef, Split, SplitRatios};
use crate::deepfeat::{self, FeatureMatrix};
use crate::error::{Error, Result};
use crate::handcrafted::extract_all;
use crate::matrix::Matrix;
use crate::metrics::{confusion, evaluate, time_pipeline, ConfusionMatrix, Metrics, TimingRecord};
use crate::raster::ImageBuffer;
use crate::rng::derive_seed;
use crate::segmentation::{isolate, threshold_crop, Mask, DEFAULT_INSET, DEFAULT_ITERS};
use crate::select::{rank_embedded_rf, select_top_k, wrapper_forward, SelectionResult, WrapperData, DEFAULT_PATIENCE};

pub use synth::{synth_corpus, SynthConfig};

/// The selection sweep reported by default.
pub const DEFAULT_K_LIST: [usize; 6] = [100, 90, 80, 70, 60, 50];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Handcrafted,
    Deep,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentMode {
    #[default]
    Grabcut,
    Threshold,
    None,
}

impl SegmentMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "grabcut" => Ok(SegmentMode::Grabcut),
            "threshold" => Ok(SegmentMode::Threshold),
            "none" => Ok(SegmentMode::None),
            other => Err(Error::Config(format!("unknown segmentation mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionKind {
    #[default]
    Embedded,
    Wrapper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionPlan {
    pub method: SelectionKind,
    pub k: Vec<usize>,
    pub trees: usize,
    /// Also evaluate every spec on all features.
    pub baseline: bool,
    /// Base model of the wrapper search.
    pub wrapper_spec: ClassifierSpec,
    pub patience: usize,
}

impl Default for SelectionPlan {
    fn default() -> Self {
        Self {
            method: SelectionKind::Embedded,
            k: DEFAULT_K_LIST.to_vec(),
            trees: 200,
            baseline: true,
            wrapper_spec: ClassifierSpec::Logistic(Default::default()),
            patience: DEFAULT_PATIENCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    #[serde(default = "default_name")]
    pub name: String,
    pub pipeline: Pipeline,
    /// Class-per-directory image corpus (handcrafted pipeline).
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    /// `FMX1` feature file (deep and hybrid pipelines).
    #[serde(default)]
    pub features: Option<PathBuf>,
    /// `sample_id,label[,split]` CSV for `features`.
    #[serde(default)]
    pub labels: Option<PathBuf>,
    pub specs: Vec<ClassifierSpec>,
    #[serde(default)]
    pub selection: Option<SelectionPlan>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub ratios: SplitRatios,
    #[serde(default)]
    pub segment: SegmentMode,
    #[serde(default = "default_side")]
    pub side: u32,
    /// Per-sample latency of the external feature extractor, for feature files.
    #[serde(default)]
    pub fe_ms_per_sample: f64,
    /// One-time extraction cost over the training rows, for feature files.
    #[serde(default)]
    pub fe_s: f64,
    #[serde(default = "default_reps")]
    pub timing_reps: usize,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_side() -> u32 {
    dataset::DEFAULT_SIDE
}

fn default_reps() -> usize {
    3
}

impl ExperimentPlan {
    pub fn new(pipeline: Pipeline, specs: Vec<ClassifierSpec>) -> Self {
        Self {
            name: default_name(),
            pipeline,
            dataset: None,
            features: None,
            labels: None,
            specs,
            selection: None,
            seed: 0,
            out_dir: None,
            ratios: SplitRatios::default(),
            segment: SegmentMode::default(),
            side: default_side(),
            fe_ms_per_sample: 0.0,
            fe_s: 0.0,
            timing_reps: default_reps(),
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Config(format!("plan: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::Config("plan lists no classifiers".into()));
        }
        for s in &self.specs {
            s.validate()?;
        }
        self.ratios.validate()?;
        match self.pipeline {
            Pipeline::Handcrafted if self.dataset.is_none() => {
                return Err(Error::Config("handcrafted pipeline needs a dataset directory".into()))
            }
            Pipeline::Deep | Pipeline::Hybrid if self.features.is_none() || self.labels.is_none() => {
                return Err(Error::Config("deep and hybrid pipelines need a feature file and a labels file".into()))
            }
            _ => {}
        }
        if let Some(sel) = &self.selection {
            if sel.k.contains(&0) {
                return Err(Error::Config("selection k must be >= 1".into()));
            }
            if sel.k.is_empty() && !sel.baseline {
                return Err(Error::Config("selection lists no k and no baseline".into()));
            }
            if sel.trees == 0 || sel.patience == 0 {
                return Err(Error::Config("selection trees and patience must be >= 1".into()));
            }
        }
        if self.timing_reps < 3 {
            return Err(Error::Config("timing_reps must be >= 3".into()));
        }
        if !(self.fe_ms_per_sample >= 0.0 && self.fe_s >= 0.0) {
            return Err(Error::Config("feature extraction times must be non-negative".into()));
        }
        Ok(())
    }
}

/// Features, labels and split assignment ready for the grid.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: String,
    pub pipeline: Pipeline,
    pub source_tag: String,
    pub x: Matrix,
    pub labels: Vec<usize>,
    pub splits: Vec<Split>,
    pub class_names: Vec<String>,
    /// Extraction seconds summed over the training rows.
    pub fe_s: f64,
    /// Mean extraction milliseconds per test row.
    pub fe_ms: f64,
}

impl Prepared {
    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn rows_of(&self, split: Split) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.splits[i] == split).collect()
    }
}

/// Handcrafted features for every sample of a dataset.
pub struct Extracted {
    pub features: FeatureMatrix,
    /// Wall-clock seconds per sample.
    pub seconds: Vec<f64>,
    /// Samples whose segmentation fell back or had degenerate blocks.
    pub flagged: Vec<usize>,
}

pub fn sample_id(ds: &LabeledDataset, s: &SampleRef) -> String {
    let file = s.path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{}/{file}", ds.class_names[s.class_id])
}

/// Segment (or not) and compute the 1305-value descriptor.
pub fn describe(img: &ImageBuffer, segment: SegmentMode) -> Result<(Vec<f64>, bool)> {
    let (v, seg_flag) = match segment {
        SegmentMode::Grabcut => {
            let iso = isolate(img, DEFAULT_ITERS, DEFAULT_INSET)?;
            let flag = iso.flagged();
            (extract_all(&iso.crop.image, &iso.crop.mask)?, flag)
        }
        SegmentMode::Threshold => {
            let crop = threshold_crop(img, &Mask::full(img.width(), img.height()));
            let flag = crop.fallback;
            (extract_all(&crop.image, &crop.mask)?, flag)
        }
        SegmentMode::None => (extract_all(img, &Mask::full(img.width(), img.height()))?, false),
    };
    let flagged = seg_flag || !v.flagged().is_empty();
    Ok((v.flat, flagged))
}

pub fn extract_dataset(ds: &LabeledDataset, segment: SegmentMode, side: u32) -> Result<Extracted> {
    let rows: Vec<(Vec<f64>, bool, f64)> = ds
        .samples
        .par_iter()
        .map(|s| {
            let t = Instant::now();
            let img = dataset::load_and_resize(s, side)?;
            let (v, flagged) = describe(&img, segment)?;
            Ok((v, flagged, t.elapsed().as_secs_f64()))
        })
        .collect::<Result<_>>()?;
    let ids = ds.samples.iter().map(|s| sample_id(ds, s)).collect();
    let d = rows.first().map_or(0, |r| r.0.len());
    let values = rows.iter().flat_map(|r| r.0.iter().map(|&v| v as f32)).collect();
    let features = FeatureMatrix::new(rows.len(), d, values, "handcrafted_v1", ids)?;
    let flagged = rows.iter().enumerate().filter(|(_, r)| r.1).map(|(i, _)| i).collect();
    let seconds = rows.iter().map(|r| r.2).collect();
    Ok(Extracted { features, seconds, flagged })
}

/// Stratified split of feature rows that carry no split assignment.
pub fn split_rows(ids: &[String], labels: &[usize], class_count: usize, ratios: SplitRatios, seed: u64) -> Result<Vec<Split>> {
    let ds = LabeledDataset {
        samples: ids
            .iter()
            .zip(labels)
            .map(|(id, &class_id)| SampleRef { path: PathBuf::from(id), class_id, split: Split::Unassigned })
            .collect(),
        class_names: (0..class_count).map(|c| c.to_string()).collect(),
        seed,
        skipped: vec![],
    };
    Ok(dataset::split(&ds, ratios, seed)?.samples.iter().map(|s| s.split).collect())
}

pub fn prepare(plan: &ExperimentPlan) -> Result<Prepared> {
    plan.validate()?;
    match plan.pipeline {
        Pipeline::Handcrafted => {
            let root = plan.dataset.as_deref().expect("validated");
            let ds = dataset::split(&dataset::scan_directory(root)?, plan.ratios, plan.seed)?;
            let ex = extract_dataset(&ds, plan.segment, plan.side)?;
            let splits: Vec<Split> = ds.samples.iter().map(|s| s.split).collect();
            let fe_s = (0..splits.len()).filter(|&i| splits[i] == Split::Train).map(|i| ex.seconds[i]).sum();
            let test: Vec<f64> = (0..splits.len()).filter(|&i| splits[i] == Split::Test).map(|i| ex.seconds[i]).collect();
            let fe_ms = if test.is_empty() { 0.0 } else { 1000.0 * test.iter().sum::<f64>() / test.len() as f64 };
            Ok(Prepared {
                dataset: root.display().to_string(),
                pipeline: plan.pipeline,
                source_tag: ex.features.source_tag.clone(),
                x: ex.features.to_matrix(),
                labels: ds.labels(),
                splits,
                class_names: ds.class_names.clone(),
                fe_s,
                fe_ms,
            })
        }
        Pipeline::Deep | Pipeline::Hybrid => {
            let path = plan.features.as_deref().expect("validated");
            let fm = deepfeat::read_matrix(path)?;
            let table = deepfeat::read_labels(plan.labels.as_deref().expect("validated"))?;
            let (labels, mut splits) = table.align(&fm)?;
            let class_count = table.class_count();
            if splits.iter().all(|&s| s == Split::Unassigned) {
                splits = split_rows(fm.sample_ids(), &labels, class_count, plan.ratios, plan.seed)?;
            }
            Ok(Prepared {
                dataset: path.display().to_string(),
                pipeline: plan.pipeline,
                source_tag: fm.source_tag.clone(),
                x: fm.to_matrix(),
                labels,
                splits,
                class_names: (0..class_count).map(|c| c.to_string()).collect(),
                fe_s: plan.fe_s,
                fe_ms: plan.fe_ms_per_sample,
            })
        }
    }
}

/// A classifier together with the feature columns it consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub pipeline: Pipeline,
    pub source_tag: String,
    pub input_dim: usize,
    /// Ascending column indices; `None` keeps every column.
    pub columns: Option<Vec<usize>>,
    pub class_names: Vec<String>,
    pub model: TrainedModel,
}

impl PipelineModel {
    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.input_dim {
            return Err(Error::Validation(format!("expected {} features, got {}", self.input_dim, x.cols())));
        }
        Ok(match &self.columns {
            Some(c) => x.select_cols(c),
            None => x.clone(),
        })
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Result<Vec<usize>> {
        self.model.predict_matrix(&self.project(x)?)
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(self)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_slice(bytes)?;
        let model = TrainedModel::from_json(&serde_json::to_vec(&value["model"])?)?;
        let mut pm: PipelineModel = serde_json::from_value(value)?;
        pm.model = model;
        let used = pm.columns.as_ref().map_or(pm.input_dim, Vec::len);
        if used != pm.model.feature_dim {
            return Err(Error::Format("column list does not match the model dimension".into()));
        }
        if let Some(c) = &pm.columns {
            if c.iter().any(|&j| j >= pm.input_dim) || c.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Format("column list must be ascending and below input_dim".into()));
            }
        }
        Ok(pm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub pipeline: Pipeline,
    pub model: String,
    pub k_features: usize,
    pub total_features: usize,
    /// Percentage of input features dropped by selection.
    pub reduction_pct: f64,
    pub metrics: Option<Metrics>,
    pub confusion: Option<ConfusionMatrix>,
    pub timing: Option<TimingRecord>,
    pub error: Option<String>,
}

pub struct CellResult {
    pub report: EvalReport,
    pub model: Option<PipelineModel>,
}

pub struct ExperimentRun {
    pub cells: Vec<CellResult>,
    pub selection: Option<SelectionResult>,
}

impl ExperimentRun {
    pub fn reports(&self) -> Vec<EvalReport> {
        self.cells.iter().map(|c| c.report.clone()).collect()
    }

    pub fn timing_rows(&self) -> Vec<TimingRow> {
        self.cells
            .iter()
            .filter_map(|c| c.report.timing.map(|t| TimingRow { model: c.report.model.clone(), k_features: c.report.k_features, record: t }))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub model: String,
    pub k_features: usize,
    pub record: TimingRecord,
}

fn reduction(k: usize, d: usize) -> f64 {
    (10000.0 * (1.0 - k as f64 / d as f64)).round() / 100.0
}

/// Score a fitted model on the test rows of `data`.
pub fn evaluate_model(pm: &PipelineModel, x: &Matrix, labels: &[usize]) -> Result<(ConfusionMatrix, Metrics)> {
    let pred = pm.predict_matrix(x)?;
    let cm = confusion(labels, &pred, pm.model.class_count)?;
    let m = evaluate(&cm)?;
    Ok((cm, m))
}

/// Fit the selection ranking on the training rows of `data`.
pub fn fit_selection(plan: &ExperimentPlan, data: &Prepared) -> Result<Option<SelectionResult>> {
    let Some(sel) = &plan.selection else { return Ok(None) };
    let train_rows = data.rows_of(Split::Train);
    let x = data.x.select_rows(&train_rows);
    let y: Vec<usize> = train_rows.iter().map(|&i| data.labels[i]).collect();
    let seed = derive_seed(plan.seed, 1);
    Ok(Some(match sel.method {
        SelectionKind::Embedded => rank_embedded_rf(&x, &y, data.class_count(), sel.trees, seed)?,
        SelectionKind::Wrapper => {
            let val_rows = data.rows_of(Split::Val);
            if val_rows.is_empty() {
                return Err(Error::Config("wrapper selection needs validation rows".into()));
            }
            let vx = data.x.select_rows(&val_rows);
            let vy: Vec<usize> = val_rows.iter().map(|&i| data.labels[i]).collect();
            let max_k = sel.k.iter().copied().max().unwrap_or(1).min(x.cols());
            let wd = WrapperData { train_x: &x, train_y: &y, val_x: &vx, val_y: &vy, class_count: data.class_count() };
            wrapper_forward(&wd, &sel.wrapper_spec, max_k, sel.patience, seed)?
        }
    }))
}

/// Run every (spec, k) cell. Cell failures are recorded in their report.
pub fn run_prepared(plan: &ExperimentPlan, data: &Prepared) -> Result<ExperimentRun> {
    plan.validate()?;
    let train_rows = data.rows_of(Split::Train);
    let test_rows = data.rows_of(Split::Test);
    if train_rows.is_empty() || test_rows.is_empty() {
        return Err(Error::Stratification("the split leaves no training or no test rows".into()));
    }
    let x_train = data.x.select_rows(&train_rows);
    let y_train: Vec<usize> = train_rows.iter().map(|&i| data.labels[i]).collect();
    let x_test = data.x.select_rows(&test_rows);
    let y_test: Vec<usize> = test_rows.iter().map(|&i| data.labels[i]).collect();
    let selection = fit_selection(plan, data)?;

    let ks: Vec<Option<usize>> = match &plan.selection {
        None => vec![None],
        Some(sel) => sel.baseline.then_some(None).into_iter().chain(sel.k.iter().map(|&k| Some(k))).collect(),
    };
    let grid: Vec<(&ClassifierSpec, Option<usize>)> = plan.specs.iter().flat_map(|s| ks.iter().map(move |&k| (s, k))).collect();
    let d = data.x.cols();
    let cell_seed = derive_seed(plan.seed, 2);

    let fitted: Vec<(EvalReport, Option<PipelineModel>)> = grid
        .par_iter()
        .map(|&(spec, k)| {
            let mut report = EvalReport {
                dataset: data.dataset.clone(),
                pipeline: data.pipeline,
                model: spec.label(),
                k_features: k.unwrap_or(d),
                total_features: d,
                reduction_pct: reduction(k.unwrap_or(d), d),
                metrics: None,
                confusion: None,
                timing: None,
                error: None,
            };
            let result = (|| {
                let columns = match (k, &selection) {
                    (Some(k), Some(sel)) => Some(select_top_k(sel, k)?),
                    _ => None,
                };
                let xs = match &columns {
                    Some(c) => x_train.select_cols(c),
                    None => x_train.clone(),
                };
                let t = Instant::now();
                let model = classifiers::train(spec, &xs, &y_train, data.class_count(), cell_seed)?;
                let train_s = t.elapsed().as_secs_f64();
                let pm = PipelineModel {
                    pipeline: data.pipeline,
                    source_tag: data.source_tag.clone(),
                    input_dim: d,
                    columns,
                    class_names: data.class_names.clone(),
                    model,
                };
                let (cm, m) = evaluate_model(&pm, &x_test, &y_test)?;
                Ok::<_, Error>((pm, cm, m, train_s))
            })();
            match result {
                Ok((pm, cm, m, train_s)) => {
                    report.confusion = Some(cm);
                    report.metrics = Some(m);
                    report.timing = Some(TimingRecord::new(train_s, data.fe_s, data.fe_ms, 0.0, test_rows.len(), test_rows.len()));
                    (report, Some(pm))
                }
                Err(e) => {
                    report.error = Some(e.to_string());
                    (report, None)
                }
            }
        })
        .collect();

    // Classifier latency is measured afterwards, one cell at a time.
    let mut cells = Vec::with_capacity(fitted.len());
    for (mut report, model) in fitted {
        if let (Some(pm), Some(t)) = (&model, report.timing) {
            let projected = pm.project(&x_test)?;
            let clf = time_pipeline(
                || {
                    std::hint::black_box(pm.model.predict_matrix(&projected).ok());
                },
                plan.timing_reps,
                test_rows.len(),
            )?;
            report.timing = Some(TimingRecord::new(t.train_s, t.fe_s, t.fe_ms, clf.per_sample_ms, t.batch_size, t.n_test));
        }
        cells.push(CellResult { report, model });
    }
    Ok(ExperimentRun { cells, selection })
}

/// Prepare, run and (with `out_dir`) write all outputs.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<EvalReport>> {
    let data = prepare(plan)?;
    let run = run_prepared(plan, &data)?;
    if let Some(dir) = &plan.out_dir {
        write_outputs(&run, dir)?;
    }
    Ok(run.reports())
}

/// Selection sweep over `k_list` with one ranking fitted on the training rows.
pub fn sweep_selection(plan: &ExperimentPlan, data: &Prepared, k_list: &[usize]) -> Result<Vec<EvalReport>> {
    let mut plan = plan.clone();
    let mut sel = plan.selection.take().unwrap_or_default();
    sel.k = k_list.to_vec();
    sel.baseline = false;
    plan.selection = Some(sel);
    Ok(run_prepared(&plan, data)?.reports())
}

pub fn timing_table(plan: &ExperimentPlan) -> Result<Vec<TimingRow>> {
    let data = prepare(plan)?;
    Ok(run_prepared(plan, &data)?.timing_rows())
}

const RESULT_COLUMNS: [&str; 18] = [
    "dataset",
    "pipeline",
    "model",
    "k_features",
    "reduction_pct",
    "accuracy",
    "precision_macro",
    "recall_macro",
    "f1_macro",
    "precision_weighted",
    "recall_weighted",
    "f1_weighted",
    "train_s",
    "fe_s",
    "fe_ms",
    "clf_ms",
    "infer_ms",
    "error",
];

fn pipeline_name(p: Pipeline) -> &'static str {
    match p {
        Pipeline::Handcrafted => "handcrafted",
        Pipeline::Deep => "deep",
        Pipeline::Hybrid => "hybrid",
    }
}

pub fn write_results_csv(reports: &[EvalReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RESULT_COLUMNS)?;
    for r in reports {
        let mut rec = vec![
            r.dataset.clone(),
            pipeline_name(r.pipeline).into(),
            r.model.clone(),
            r.k_features.to_string(),
            format!("{:.2}", r.reduction_pct),
        ];
        match &r.metrics {
            Some(m) => {
                let (a, b) = (m.macro_avg, m.weighted);
                rec.extend([a.accuracy, a.precision, a.recall, a.f1, b.precision, b.recall, b.f1].map(|v| format!("{v:.2}")));
            }
            None => rec.extend(std::iter::repeat_n(String::new(), 7)),
        }
        match &r.timing {
            Some(t) => rec.extend([t.train_s, t.fe_s, t.fe_ms, t.clf_ms, t.infer_ms_per_sample].map(|v| format!("{v:.6}"))),
            None => rec.extend(std::iter::repeat_n(String::new(), 5)),
        }
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timing_csv(rows: &[TimingRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["model", "k_features", "train_s", "fe_s", "fe_ms", "clf_ms", "infer_ms_per_sample", "batch_size", "n_test"])?;
    for r in rows {
        let t = &r.record;
        w.write_record([
            r.model.clone(),
            r.k_features.to_string(),
            format!("{:.6}", t.train_s),
            format!("{:.6}", t.fe_s),
            format!("{:.6}", t.fe_ms),
            format!("{:.6}", t.clf_ms),
            format!("{:.6}", t.infer_ms_per_sample),
            t.batch_size.to_string(),
            t.n_test.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `reports/NNN_<model>_k<k>.json`, `results.csv`, `timing.csv` and, when
/// selection ran, `selection.json`.
pub fn write_outputs(run: &ExperimentRun, dir: &Path) -> Result<()> {
    let reports_dir = dir.join("reports");
    std::fs::create_dir_all(&reports_dir)?;
    let reports = run.reports();
    for (i, r) in reports.iter().enumerate() {
        let name = format!("{i:03}_{}_k{}.json", r.model, r.k_features);
        deepfeat::write_atomic(&reports_dir.join(name), &serde_json::to_vec_pretty(r)?)?;
    }
    write_results_csv(&reports, &dir.join("results.csv"))?;
    write_timing_csv(&run.timing_rows(), &dir.join("timing.csv"))?;
    if let Some(sel) = &run.selection {
        deepfeat::write_atomic(&dir.join("selection.json"), &sel.to_json()?)?;
    }
    Ok(())
}

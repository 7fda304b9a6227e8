mod common;

use std::fs;
use std::path::Path;

use common::write_feature_set;
use wastebench::bench::synth::{synth_corpus, SynthConfig};
use wastebench::bench::*;
use wastebench::classifiers::{ClassifierSpec, ForestParams};
use wastebench::select::informative_benchmark;
use wastebench::Matrix;

fn hybrid_plan(dir: &Path, x: &Matrix, labels: &[usize], train: usize, val: usize, specs: &[&str], k: Vec<usize>) -> ExperimentPlan {
    let (features, sidecar) = write_feature_set(dir, x, labels, train, val);
    let mut plan = ExperimentPlan::new(Pipeline::Hybrid, specs.iter().map(|s| ClassifierSpec::from_family(s).unwrap()).collect());
    plan.features = Some(features);
    plan.labels = Some(sidecar);
    plan.selection = Some(SelectionPlan { k, trees: 60, ..Default::default() });
    plan.seed = 7;
    plan
}

#[test]
fn pooled_deep_grid_runs_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let b = informative_benchmark(300, 2048, 20, 3, 1.5, 1);
    let mut plan = hybrid_plan(dir.path(), &b.x, &b.labels, 60, 0, &["logistic", "svm"], vec![100, 50]);
    plan.fe_ms_per_sample = 12.5;
    plan.fe_s = 3.0;
    let data = prepare(&plan).unwrap();
    assert_eq!(data.x.cols(), 2048);
    let run = run_prepared(&plan, &data).unwrap();
    let reports = run.reports();
    assert_eq!(reports.len(), 6);
    let n_test = data.rows_of(wastebench::dataset::Split::Test).len();
    assert_eq!(n_test, 120);
    for r in &reports {
        assert!(r.error.is_none(), "{r:?}");
        assert_eq!(r.total_features, 2048);
        let expected = match r.k_features {
            2048 => 0.0,
            100 => 95.12,
            50 => 97.56,
            k => panic!("unexpected k {k}"),
        };
        assert_eq!(r.reduction_pct, expected);
        assert_eq!(r.confusion.as_ref().unwrap().total(), n_test as u64);
        let t = r.timing.unwrap();
        assert_eq!(t.fe_ms, 12.5);
        assert_eq!(t.fe_s, 3.0);
        assert_eq!(t.infer_ms_per_sample, t.fe_ms + t.clf_ms);
        assert!(t.clf_ms > 0.0 && t.train_s > 0.0);
        assert!(r.metrics.unwrap().macro_avg.accuracy > 60.0, "{r:?}");
    }
    let sel = run.selection.as_ref().unwrap();
    for c in &run.cells {
        let pm = c.model.as_ref().unwrap();
        if c.report.k_features < 2048 {
            let cols = pm.columns.as_ref().unwrap();
            assert_eq!(cols.len(), c.report.k_features);
            assert!(cols.iter().all(|j| sel.ranked_indices[..c.report.k_features].contains(j)));
        } else {
            assert!(pm.columns.is_none());
        }
    }
}

#[test]
fn oversized_k_fails_only_its_cell() {
    let dir = tempfile::tempdir().unwrap();
    let b = informative_benchmark(90, 20, 4, 3, 2.0, 2);
    let plan = hybrid_plan(dir.path(), &b.x, &b.labels, 20, 0, &["dtree"], vec![10, 50]);
    let reports = run_prepared(&plan, &prepare(&plan).unwrap()).unwrap().reports();
    assert_eq!(reports.len(), 3);
    let failed: Vec<_> = reports.iter().filter(|r| r.error.is_some()).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].k_features, 50);
    assert!(failed[0].metrics.is_none());
    assert!(reports.iter().filter(|r| r.error.is_none()).all(|r| r.metrics.is_some()));
}

#[test]
fn full_width_selection_matches_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let b = informative_benchmark(120, 30, 5, 3, 1.5, 3);
    let plan = hybrid_plan(dir.path(), &b.x, &b.labels, 25, 0, &["logistic", "rforest"], vec![30]);
    let run = run_prepared(&plan, &prepare(&plan).unwrap()).unwrap();
    for pair in run.cells.chunks(2) {
        let (base, full) = (&pair[0], &pair[1]);
        assert_eq!(base.report.metrics, full.report.metrics);
        assert_eq!(base.report.confusion, full.report.confusion);
        assert_eq!(base.model.as_ref().unwrap().model.to_json().unwrap(), full.model.as_ref().unwrap().model.to_json().unwrap());
    }
}

#[test]
fn same_seed_same_results() {
    let dir = tempfile::tempdir().unwrap();
    let b = informative_benchmark(120, 40, 5, 3, 1.5, 4);
    let mut plan = hybrid_plan(dir.path(), &b.x, &b.labels, 25, 0, &["rforest", "gbdt", "knn"], vec![10]);
    plan.specs[0] = ClassifierSpec::Rforest(ForestParams { n_trees: 30, ..Default::default() });
    let data = prepare(&plan).unwrap();
    let a = run_prepared(&plan, &data).unwrap();
    let b = run_prepared(&plan, &data).unwrap();
    assert_eq!(a.selection, b.selection);
    for (x, y) in a.cells.iter().zip(&b.cells) {
        assert_eq!(x.report.metrics, y.report.metrics);
        assert_eq!(x.model.as_ref().unwrap().to_json().unwrap(), y.model.as_ref().unwrap().to_json().unwrap());
    }
}

#[test]
fn test_rows_never_reach_training() {
    let dir = tempfile::tempdir().unwrap();
    let b = informative_benchmark(150, 50, 6, 3, 1.5, 5);
    let plan = hybrid_plan(dir.path(), &b.x, &b.labels, 30, 5, &["logistic", "dtree"], vec![10]);
    let clean = run_prepared(&plan, &prepare(&plan).unwrap()).unwrap();

    // corrupt every test row's features and labels
    let poisoned_dir = tempfile::tempdir().unwrap();
    let mut x = b.x.clone();
    let mut labels = b.labels.clone();
    let mut seen = [0usize; 3];
    for i in 0..x.rows() {
        seen[labels[i]] += 1;
        if seen[labels[i]] > 35 {
            x.row_mut(i).iter_mut().for_each(|v| *v = -*v * 1000.0 + 7.0);
            labels[i] = (labels[i] + 1) % 3;
        }
    }
    let (features, sidecar) = write_feature_set(poisoned_dir.path(), &x, &labels, 30, 5);
    let mut poisoned_plan = plan.clone();
    poisoned_plan.features = Some(features);
    poisoned_plan.labels = Some(sidecar);
    let poisoned = run_prepared(&poisoned_plan, &prepare(&poisoned_plan).unwrap()).unwrap();

    assert_eq!(clean.selection.as_ref().unwrap().to_json().unwrap(), poisoned.selection.as_ref().unwrap().to_json().unwrap());
    for (a, b) in clean.cells.iter().zip(&poisoned.cells) {
        assert_eq!(a.model.as_ref().unwrap().to_json().unwrap(), b.model.as_ref().unwrap().to_json().unwrap());
    }
}

#[test]
fn wrapper_plan_uses_validation_rows() {
    let dir = tempfile::tempdir().unwrap();
    let b = informative_benchmark(120, 12, 3, 2, 3.0, 6);
    let mut plan = hybrid_plan(dir.path(), &b.x, &b.labels, 30, 15, &["logistic"], vec![3]);
    plan.selection.as_mut().unwrap().method = SelectionKind::Wrapper;
    let run = run_prepared(&plan, &prepare(&plan).unwrap()).unwrap();
    let sel = run.selection.unwrap();
    assert_eq!(sel.method, wastebench::select::SelectionMethod::WrapperForward);
    assert!(sel.ranked_indices.len() <= 3);
    assert!(b.informative.contains(&sel.ranked_indices[0]));

    let dir = tempfile::tempdir().unwrap();
    let mut plan = hybrid_plan(dir.path(), &b.x, &b.labels, 30, 0, &["logistic"], vec![3]);
    plan.selection.as_mut().unwrap().method = SelectionKind::Wrapper;
    assert!(run_prepared(&plan, &prepare(&plan).unwrap()).is_err());
}

#[test]
fn outputs_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let b = informative_benchmark(90, 25, 4, 3, 2.0, 8);
    let mut plan = hybrid_plan(dir.path(), &b.x, &b.labels, 20, 0, &["logistic", "knn"], vec![20, 10, 5]);
    let out = dir.path().join("out");
    plan.out_dir = Some(out.clone());
    let reports = run_experiment(&plan).unwrap();
    assert_eq!(reports.len(), 2 * 4);
    let mut r = csv::Reader::from_path(out.join("results.csv")).unwrap();
    assert_eq!(r.headers().unwrap().len(), 18);
    let rows: Vec<csv::StringRecord> = r.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 8);
    let reductions: Vec<&str> = rows.iter().map(|r| &r[4]).collect();
    assert_eq!(reductions, ["0.00", "20.00", "60.00", "80.00", "0.00", "20.00", "60.00", "80.00"]);
    assert_eq!(fs::read_dir(out.join("reports")).unwrap().count(), 8);
    assert!(out.join("reports/000_logistic_k25.json").exists());
    assert!(out.join("selection.json").exists());
    let timing = fs::read_to_string(out.join("timing.csv")).unwrap();
    assert_eq!(timing.lines().count(), 9);
    let back: EvalReport = serde_json::from_slice(&fs::read(out.join("reports/005_knn_k20.json")).unwrap()).unwrap();
    assert_eq!(back, reports[5]);
}

#[test]
fn plan_json_is_strict() {
    let ok = br#"{"pipeline":"hybrid","features":"f.fmx","labels":"l.csv","specs":[{"family":"logistic"}]}"#;
    let p = ExperimentPlan::from_json(ok).unwrap();
    assert_eq!(p.timing_reps, 3);
    assert_eq!(p.specs, vec![ClassifierSpec::from_family("logistic").unwrap()]);
    p.validate().unwrap();
    let bad = br#"{"pipeline":"hybrid","specs":[],"bogus":1}"#;
    assert!(matches!(ExperimentPlan::from_json(bad), Err(wastebench::Error::Config(_))));
    let plan = ExperimentPlan::new(Pipeline::Hybrid, vec![]);
    assert!(matches!(plan.validate(), Err(wastebench::Error::Config(_))));
}

#[test]
fn handcrafted_flow_on_synthetic_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("corpus");
    synth_corpus(&root, &SynthConfig { classes: 3, per_class: 10, side: 64, seed: 3 }).unwrap();
    let mut plan = ExperimentPlan::new(Pipeline::Handcrafted, vec![ClassifierSpec::from_family("dtree").unwrap()]);
    plan.dataset = Some(root);
    plan.side = 64;
    let data = prepare(&plan).unwrap();
    assert_eq!(data.x.rows(), 30);
    assert_eq!(data.x.cols(), 1305);
    assert_eq!(data.class_names.len(), 3);
    assert!(data.fe_s > 0.0 && data.fe_ms > 0.0);
    let reports = run_prepared(&plan, &data).unwrap().reports();
    assert_eq!(reports.len(), 1);
    let t = reports[0].timing.unwrap();
    assert_eq!(t.fe_ms, data.fe_ms);
    assert_eq!(t.infer_ms_per_sample, t.fe_ms + t.clf_ms);
}

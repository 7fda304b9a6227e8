use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wastebench::bench::{self, ExperimentPlan, Pipeline, PipelineModel, Prepared, SegmentMode, SynthConfig};
use wastebench::classifiers::{self, ClassifierSpec, LogisticParams, Loss};
use wastebench::dataset::{self, audit_features, Split, SplitRatios};
use wastebench::deepfeat::{self, FeatureMatrix};
use wastebench::metrics::{time_pipeline, TimingRecord};
use wastebench::select::{self, SelectionResult, WrapperData};
use wastebench::{Error, Result};

#[derive(Parser)]
#[command(name = "wastebench", version, about = "Waste image classification workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment and describe every image of a class-per-directory corpus.
    Extract(ExtractArgs),
    /// Precomputed deep features.
    Deepfeat {
        #[command(subcommand)]
        command: DeepfeatCommand,
    },
    /// Rank features by forest importance or greedy forward search.
    Select(SelectArgs),
    /// Fit one classifier on the training rows.
    Train(TrainArgs),
    /// Score a model on the test rows.
    Eval(EvalArgs),
    /// Run an experiment plan.
    Bench(BenchArgs),
    /// Flag samples whose out-of-fold prediction contradicts their label.
    Audit(AuditArgs),
    /// Write the synthetic shape/color corpus.
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum DeepfeatCommand {
    /// Convert a numeric CSV into an FMX1 file.
    Import(ImportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Segment {
    Grabcut,
    Threshold,
    None,
}

impl From<Segment> for SegmentMode {
    fn from(s: Segment) -> Self {
        match s {
            Segment::Grabcut => SegmentMode::Grabcut,
            Segment::Threshold => SegmentMode::Threshold,
            Segment::None => SegmentMode::None,
        }
    }
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "grabcut")]
    segment: Segment,
    #[arg(long, default_value_t = dataset::DEFAULT_SIDE)]
    side: u32,
    /// Seed of the stratified split written to the labels file.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Labels file; defaults to `<out>.labels.csv`.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args)]
struct ImportArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// The first row holds data, not column names.
    #[arg(long)]
    no_header: bool,
    /// Treat an integer-valued last column as labels.
    #[arg(long)]
    label_column: bool,
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args)]
struct FeatureInput {
    #[arg(long)]
    features: PathBuf,
    /// Labels file; defaults to `<features>.labels.csv`.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Embedded,
    Wrapper,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    input: FeatureInput,
    #[arg(long, value_enum, default_value = "embedded")]
    method: Method,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    trees: usize,
    #[arg(long, default_value_t = 100)]
    max_k: usize,
    #[arg(long, default_value_t = select::DEFAULT_PATIENCE)]
    patience: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Ce,
    Focal,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    input: FeatureInput,
    /// logistic, knn, svm, dtree, rforest, gbdt or gbdt_leaf.
    #[arg(long)]
    model: String,
    #[arg(long, value_enum, default_value = "ce")]
    loss: LossArg,
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    /// Selection JSON whose top `--k` features the model uses.
    #[arg(long, requires = "k")]
    selection: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: FeatureInput,
    #[arg(long)]
    report: PathBuf,
    /// Evaluate every row instead of the test split.
    #[arg(long)]
    all_rows: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Audit an existing feature file instead of extracting from `--dataset`.
    #[arg(long, conflicts_with = "dataset")]
    features: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, value_enum, default_value = "grabcut")]
    segment: Segment,
    #[arg(long, default_value_t = dataset::DEFAULT_SIDE)]
    side: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long, default_value_t = 100)]
    per_class: usize,
    #[arg(long, default_value_t = 128)]
    side: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn sidecar(features: &Path) -> PathBuf {
    let mut name = features.as_os_str().to_owned();
    name.push(".labels.csv");
    PathBuf::from(name)
}

fn write_json(value: &bench::EvalReport, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

fn load(input: &FeatureInput) -> Result<Prepared> {
    let mut plan = ExperimentPlan::new(Pipeline::Hybrid, vec![ClassifierSpec::from_family("logistic")?]);
    plan.features = Some(input.features.clone());
    plan.labels = Some(input.labels.clone().unwrap_or_else(|| sidecar(&input.features)));
    plan.seed = input.seed;
    bench::prepare(&plan)
}

fn rows(data: &Prepared, split: Split) -> (wastebench::Matrix, Vec<usize>) {
    let idx = data.rows_of(split);
    (data.x.select_rows(&idx), idx.iter().map(|&i| data.labels[i]).collect())
}

fn extract(a: &ExtractArgs) -> Result<()> {
    let ds = dataset::split(&dataset::scan_directory(&a.dataset)?, SplitRatios::default(), a.seed)?;
    let ex = bench::extract_dataset(&ds, a.segment.into(), a.side)?;
    deepfeat::write_matrix(&ex.features, &a.out)?;
    let labels_out = a.labels_out.clone().unwrap_or_else(|| sidecar(&a.out));
    let splits: Vec<Split> = ds.samples.iter().map(|s| s.split).collect();
    deepfeat::write_labels(ex.features.sample_ids(), &ds.labels(), &splits, &labels_out)?;
    for p in &ds.skipped {
        eprintln!("skipped undecodable {}", p.display());
    }
    eprintln!("{} samples, {} flagged, {} features", ex.features.n(), ex.flagged.len(), ex.features.d());
    Ok(())
}

fn import(a: &ImportArgs) -> Result<()> {
    let (m, labels) = deepfeat::import_csv(&a.csv, !a.no_header, a.label_column)?;
    deepfeat::write_matrix(&m, &a.out)?;
    if let Some(labels) = labels {
        let splits = vec![Split::Unassigned; labels.len()];
        deepfeat::write_labels(m.sample_ids(), &labels, &splits, &a.labels_out.clone().unwrap_or_else(|| sidecar(&a.out)))?;
    }
    eprintln!("{} rows, {} features", m.n(), m.d());
    Ok(())
}

fn run_select(a: &SelectArgs) -> Result<()> {
    let data = load(&a.input)?;
    let (x, y) = rows(&data, Split::Train);
    let res = match a.method {
        Method::Embedded => select::rank_embedded_rf(&x, &y, data.class_count(), a.trees, a.input.seed)?,
        Method::Wrapper => {
            let (vx, vy) = rows(&data, Split::Val);
            if vy.is_empty() {
                return Err(Error::Config("wrapper selection needs validation rows".into()));
            }
            let wd = WrapperData { train_x: &x, train_y: &y, val_x: &vx, val_y: &vy, class_count: data.class_count() };
            let spec = ClassifierSpec::Logistic(LogisticParams::default());
            select::wrapper_forward(&wd, &spec, a.max_k.min(x.cols()), a.patience, a.input.seed)?
        }
    };
    fs::write(&a.out, res.to_json()?)?;
    Ok(())
}

fn train(a: &TrainArgs) -> Result<()> {
    let mut spec = ClassifierSpec::from_family(&a.model)?;
    if let LossArg::Focal = a.loss {
        match &mut spec {
            ClassifierSpec::Logistic(p) => p.loss = Loss::Focal { gamma: a.gamma, alpha: a.alpha },
            _ => return Err(Error::Config("focal loss applies to the logistic model only".into())),
        }
    }
    let data = load(&a.input)?;
    let (x, y) = rows(&data, Split::Train);
    let columns = match (&a.selection, a.k) {
        (Some(path), Some(k)) => Some(select::select_top_k(&SelectionResult::from_json(&fs::read(path)?)?, k)?),
        _ => None,
    };
    let xs = match &columns {
        Some(c) => x.select_cols(c),
        None => x.clone(),
    };
    let model = classifiers::train(&spec, &xs, &y, data.class_count(), a.input.seed)?;
    let pm = PipelineModel {
        pipeline: Pipeline::Hybrid,
        source_tag: data.source_tag.clone(),
        input_dim: x.cols(),
        columns,
        class_names: data.class_names.clone(),
        model,
    };
    fs::write(&a.out, pm.to_json()?)?;
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    let pm = PipelineModel::from_json(&fs::read(&a.model)?)?;
    let data = load(&a.input)?;
    let idx: Vec<usize> = if a.all_rows { (0..data.labels.len()).collect() } else { data.rows_of(Split::Test) };
    if idx.is_empty() {
        return Err(Error::Validation("no rows to evaluate".into()));
    }
    let x = data.x.select_rows(&idx);
    let y: Vec<usize> = idx.iter().map(|&i| data.labels[i]).collect();
    let (cm, metrics) = bench::evaluate_model(&pm, &x, &y)?;
    let projected = pm.project(&x)?;
    let clf = time_pipeline(
        || {
            std::hint::black_box(pm.model.predict_matrix(&projected).ok());
        },
        3,
        idx.len(),
    )?;
    let k = pm.columns.as_ref().map_or(pm.input_dim, Vec::len);
    let report = bench::EvalReport {
        dataset: a.input.features.display().to_string(),
        pipeline: pm.pipeline,
        model: pm.model.spec.label(),
        k_features: k,
        total_features: pm.input_dim,
        reduction_pct: (10000.0 * (1.0 - k as f64 / pm.input_dim as f64)).round() / 100.0,
        metrics: Some(metrics),
        confusion: Some(cm),
        timing: Some(TimingRecord::new(0.0, 0.0, 0.0, clf.per_sample_ms, idx.len(), idx.len())),
        error: None,
    };
    write_json(&report, &a.report)?;
    println!("accuracy {:.2}", metrics.weighted.accuracy);
    Ok(())
}

fn run_bench(a: &BenchArgs) -> Result<()> {
    let mut plan = ExperimentPlan::from_json(&fs::read(&a.plan)?)?;
    plan.out_dir = Some(a.out.clone());
    let reports = bench::run_experiment(&plan)?;
    for r in &reports {
        match (&r.metrics, &r.error) {
            (Some(m), _) => println!("{} k={} accuracy {:.2}", r.model, r.k_features, m.weighted.accuracy),
            (None, Some(e)) => println!("{} k={} failed: {e}", r.model, r.k_features),
            _ => {}
        }
    }
    Ok(())
}

fn audit(a: &AuditArgs) -> Result<()> {
    let (features, labels, class_count): (FeatureMatrix, Vec<usize>, usize) = match (&a.dataset, &a.features) {
        (Some(root), None) => {
            let ds = dataset::scan_directory(root)?;
            let ex = bench::extract_dataset(&ds, a.segment.into(), a.side)?;
            (ex.features, ds.labels(), ds.class_count())
        }
        (None, Some(path)) => {
            let fm = deepfeat::read_matrix(path)?;
            let table = deepfeat::read_labels(&a.labels.clone().unwrap_or_else(|| sidecar(path)))?;
            let (labels, _) = table.align(&fm)?;
            (fm, labels, table.class_count())
        }
        _ => return Err(Error::Config("audit needs --dataset or --features".into())),
    };
    let spec = ClassifierSpec::Logistic(LogisticParams::default());
    let flags = audit_features(&features.to_matrix(), &labels, class_count, a.folds, &spec, a.seed)?;
    println!("index,sample_id,stored,predicted,confidence");
    for f in &flags {
        println!("{},{},{},{},{:.4}", f.index, features.sample_ids()[f.index], f.stored, f.predicted, f.confidence);
    }
    eprintln!("{} of {} samples flagged", flags.len(), labels.len());
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<()> {
    let cfg = SynthConfig { classes: a.classes, per_class: a.per_class, side: a.side, seed: a.seed };
    bench::synth_corpus(&a.out, &cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(a) => extract(&a),
        Command::Deepfeat { command: DeepfeatCommand::Import(a) } => import(&a),
        Command::Select(a) => run_select(&a),
        Command::Train(a) => train(&a),
        Command::Eval(a) => eval(&a),
        Command::Bench(a) => run_bench(&a),
        Command::Audit(a) => audit(&a),
        Command::Synth(a) => synth(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid usage or input, 2 failure while running.

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fetqc_core::eval::{agreement_metrics, MetricName, Protocol, QualityTask, SubsampleConfig, EXCLUDE_THRESHOLD};
use fetqc_core::forest::ForestParams;
use fetqc_core::iqm::seg::LabelMerge;
use fetqc_core::phantom::DatasetConfig;
use fetqc_core::{build_catalogue, CatalogueConfig, StackRecord};

use crate::dataset::load_manifest;
use crate::model_io::{load_model, save_model};
use crate::phantom_io::{write_phantom_dataset, MANIFEST_FILE};
use crate::pipeline::{extract_all, ExtractOptions};
use crate::ratings::{aggregate_ratings, paired_columns, read_ratings, write_paired, AggregationPolicy};
use crate::report::render_bundle;
use crate::runlog::{default_log_path, RunLog};
use crate::tables::{export_csv, format_sig9, import_csv, read_dl_sidecar, read_label_mapping, read_labels, write_labels};
use crate::workflow::{
    evaluate, folds_tsv, join_labels, per_scanner_tsv, ranking_tsv, select_features, subsample, subsample_tsv, table2_tsv, train_model,
    EvalSettings, LabeledTable, SelectSettings,
};

/// Environment variable naming the default dataset root.
pub const DATASET_ENV: &str = "FETQC_DATASET";

#[derive(Debug, Parser)]
#[command(name = "fetqc", version, about = "Quality assessment and control of fetal brain MRI stacks")]
pub struct Cli {
    /// Worker threads for stack-parallel stages (0 = one per logical core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Run-log path (default: next to the main output).
    #[arg(long, global = true)]
    pub log: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with ground-truth quality and ratings.
    Phantom(PhantomArgs),
    /// Render HTML reports for every stack of a manifest.
    Report(ReportArgs),
    /// Serve reports and collect ratings.
    Serve(ServeArgs),
    /// Rating-log utilities.
    #[command(subcommand)]
    Ratings(RatingsCommand),
    /// Compute the IQM table of a dataset.
    Extract(ExtractArgs),
    /// Fit a forest on the train split.
    Train(TrainArgs),
    /// Apply a saved forest to an IQM table.
    Predict(PredictArgs),
    /// Cross-validate the forest against the task's baseline.
    Evaluate(EvaluateArgs),
    /// Experiments beyond single protocols.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Rank correlation-grouped features and keep the top k.
    Select(SelectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Qc,
    Qa,
}

impl From<TaskArg> for QualityTask {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Qc => QualityTask::Qc,
            TaskArg::Qa => QualityTask::Qa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    SubjectCv,
    Loso,
    PureTest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    LatestPerRater,
    MeanAcrossRaters,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub sites: usize,
    #[arg(long, default_value_t = 4)]
    pub scanners_per_site: usize,
    #[arg(long, default_value_t = 10)]
    pub subjects_per_scanner: usize,
    #[arg(long, default_value_t = 3)]
    pub min_stacks: usize,
    #[arg(long, default_value_t = 6)]
    pub max_stacks: usize,
    #[arg(long, default_value_t = 0.25)]
    pub rater_noise: f64,
    /// Scanners, counted from the last, placed in the pure test split.
    #[arg(long, default_value_t = 0)]
    pub pure_test_scanners: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Dataset root; its manifest.tsv is used unless --manifest is given.
    #[arg(long, env = DATASET_ENV)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

impl DatasetArgs {
    fn manifest_path(&self) -> Result<PathBuf, CliError> {
        match (&self.manifest, &self.dataset) {
            (Some(m), _) => Ok(m.clone()),
            (None, Some(d)) => Ok(d.join(MANIFEST_FILE)),
            (None, None) => Err(CliError::Validation(format!("give --manifest or --dataset (or set {DATASET_ENV})"))),
        }
    }

    fn load(&self) -> Result<(PathBuf, Vec<StackRecord>), CliError> {
        let p = self.manifest_path()?;
        require_file(&p)?;
        let records = load_manifest(&p).map_err(validation)?;
        Ok((p, records))
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Directory written by `report`.
    #[arg(long)]
    pub reports: PathBuf,
    /// JSON-lines ratings log (created when missing).
    #[arg(long)]
    pub ratings: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
}

#[derive(Debug, Subcommand)]
pub enum RatingsCommand {
    /// Turn a ratings log into a labels CSV and a paired-ratings table.
    Aggregate(AggregateArgs),
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    pub ratings: PathBuf,
    /// Labels CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = PolicyArg::LatestPerRater)]
    pub policy: PolicyArg,
    /// Primary rater for latest-per-rater (default: the rater with most stacks).
    #[arg(long)]
    pub primary: Option<String>,
    /// Paired-ratings TSV to write.
    #[arg(long)]
    pub paired: Option<PathBuf>,
    /// Manifest fixing row order; ratings of other stacks are skipped.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// `label<TAB>group` file overriding the default tissue merge.
    #[arg(long)]
    pub label_mapping: Option<PathBuf>,
    /// CSV of precomputed deep-learning scores.
    #[arg(long)]
    pub dl_sidecar: Option<PathBuf>,
    /// Derive a mask from intensities for stacks without one.
    #[arg(long)]
    pub fallback_mask: bool,
}

#[derive(Debug, Args)]
pub struct ForestArgs {
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ratings below this value mean exclusion.
    #[arg(long, default_value_t = EXCLUDE_THRESHOLD)]
    pub exclude_threshold: f64,
}

impl ForestArgs {
    fn params(&self) -> ForestParams {
        ForestParams { n_trees: self.trees, seed: self.seed, max_features: None }
    }
}

#[derive(Debug, Args)]
pub struct LabeledArgs {
    #[arg(long)]
    pub iqms: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
}

impl LabeledArgs {
    fn load(&self) -> Result<LabeledTable, CliError> {
        require_file(&self.iqms)?;
        require_file(&self.labels)?;
        let iqms = import_csv(&self.iqms).map_err(validation)?;
        let labels = read_labels(&self.labels).map_err(validation)?;
        join_labels(&iqms, &labels).map_err(validation)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: LabeledArgs,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long)]
    pub out: PathBuf,
    /// File with one feature name per line (e.g. from `select`).
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[command(flatten)]
    pub forest: ForestArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub iqms: PathBuf,
    /// TSV of stack_id, score and (for classification) include label.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: LabeledArgs,
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// Summary table to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-scanner table (default: `<out>.per_scanner.tsv`).
    #[arg(long)]
    pub per_scanner: Option<PathBuf>,
    /// Per-fold table.
    #[arg(long)]
    pub folds: Option<PathBuf>,
    /// Reduced feature list evaluated as an extra row.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    /// Folds of subject-wise cross-validation.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[command(flatten)]
    pub forest: ForestArgs,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Scanner-count × training-size grid evaluated on held-out scanners.
    Subsample(SubsampleArgs),
}

#[derive(Debug, Args)]
pub struct SubsampleArgs {
    #[command(flatten)]
    pub input: LabeledArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = TaskArg::Qc)]
    pub task: TaskArg,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4, 5, 6, 7])]
    pub scanners: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 200, 300, 400, 500, 600, 700, 800, 900])]
    pub n_train: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub repetitions: usize,
    #[command(flatten)]
    pub forest: ForestArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: LabeledArgs,
    /// Selected names, one per line.
    #[arg(long)]
    pub out: PathBuf,
    /// Full ranking with groups.
    #[arg(long)]
    pub ranking: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub top_k: usize,
    #[arg(long, default_value_t = 0.95)]
    pub threshold: f64,
    /// Allow deep-learning IQMs in the selection.
    #[arg(long)]
    pub keep_dl: bool,
    #[command(flatten)]
    pub forest: ForestArgs,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn require_file(p: &Path) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{}: no such file", p.display())))
    }
}

fn write_text(p: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(p, text).map_err(|e| runtime(format!("{}: {e}", p.display())))
}

fn read_feature_list(p: &Path) -> Result<Vec<String>, CliError> {
    require_file(p)?;
    let text = std::fs::read_to_string(p).map_err(|e| validation(format!("{}: {e}", p.display())))?;
    let names: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect();
    if names.is_empty() {
        return Err(CliError::Validation(format!("{}: no feature names", p.display())));
    }
    Ok(names)
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let mut log = RunLog::new(argv.iter().map(|a| a.to_string_lossy().into_owned()).collect());
    log.set("jobs", cli.jobs);
    match dispatch(&cli, &mut log) {
        Ok(out) => {
            let path = cli.log.clone().unwrap_or_else(|| default_log_path(&out));
            if let Err(e) = log.write(&path) {
                eprintln!("error: cannot write run log {}: {e}", path.display());
                return 2;
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command and returns its main output path.
pub fn dispatch(cli: &Cli, log: &mut RunLog) -> Result<PathBuf, CliError> {
    let jobs = cli.jobs;
    match &cli.command {
        Command::Phantom(a) => phantom(a, log),
        Command::Report(a) => {
            let (_, records) = a.data.load()?;
            let entries = render_bundle(&records, &a.out, jobs).map_err(runtime)?;
            println!("rendered {} reports into {}", entries.len(), a.out.display());
            log.output(&a.out);
            Ok(a.out.clone())
        }
        Command::Serve(a) => serve(a, log),
        Command::Ratings(RatingsCommand::Aggregate(a)) => aggregate(a, log),
        Command::Extract(a) => extract(a, jobs, log),
        Command::Train(a) => {
            let data = a.input.load()?;
            let features = a.features.as_deref().map(read_feature_list).transpose()?;
            log.seed("forest", a.forest.seed).set("task", QualityTask::from(a.task).name());
            let model =
                train_model(&data, a.task.into(), &a.forest.params(), features.as_deref(), a.forest.exclude_threshold).map_err(validation)?;
            save_model(&a.out, &model).map_err(runtime)?;
            for w in &model.warnings {
                eprintln!("warning: {}", w.name());
                log.note(format!("warning: {}", w.name()));
            }
            println!("trained {} trees on {} stacks, {} features", model.n_trees(), model.n_train, model.feature_names.len());
            log.output(&a.out);
            Ok(a.out.clone())
        }
        Command::Predict(a) => {
            require_file(&a.model)?;
            require_file(&a.iqms)?;
            let model = load_model(&a.model).map_err(validation)?;
            let iqms = import_csv(&a.iqms).map_err(validation)?;
            let pred = model.predict(&iqms.table).map_err(validation)?;
            let mut s = String::from(if pred.labels.is_some() { "stack_id\tscore\tinclude\n" } else { "stack_id\tscore\n" });
            for (i, r) in iqms.records.iter().enumerate() {
                s += &format!("{}\t{}", r.stack_id, format_sig9(pred.scores[i]));
                if let Some(l) = &pred.labels {
                    s += &format!("\t{}", l[i]);
                }
                s.push('\n');
            }
            write_text(&a.out, &s)?;
            log.output(&a.out);
            Ok(a.out.clone())
        }
        Command::Evaluate(a) => evaluate_cmd(a, log),
        Command::Experiment(ExperimentCommand::Subsample(a)) => {
            let data = a.input.load()?;
            let task: QualityTask = a.task.into();
            let cfg = SubsampleConfig {
                n_scanners: a.scanners.clone(),
                n_train: a.n_train.clone(),
                repetitions: a.repetitions,
                seed: a.forest.seed,
                task,
                metric: match task {
                    QualityTask::Qc => MetricName::WeightedF1,
                    QualityTask::Qa => MetricName::R2,
                },
                forest: a.forest.params(),
                exclude_threshold: a.forest.exclude_threshold,
            };
            log.seed("master", cfg.seed).set("repetitions", cfg.repetitions).set("task", task.name());
            let cells = subsample(&data, &cfg).map_err(runtime)?;
            write_text(&a.out, &subsample_tsv(&cells))?;
            log.output(&a.out);
            Ok(a.out.clone())
        }
        Command::Select(a) => {
            let data = a.input.load()?;
            let s = SelectSettings {
                k: a.top_k,
                threshold: a.threshold,
                exclude_dl: !a.keep_dl,
                seed: a.forest.seed,
                forest: a.forest.params(),
                exclude_threshold: a.forest.exclude_threshold,
            };
            log.seed("master", s.seed).set("top_k", s.k).set("threshold", s.threshold).set("exclude_dl", s.exclude_dl);
            log.note("correlations computed on the train split");
            let ranking = select_features(&data, &s).map_err(runtime)?;
            write_text(&a.out, &(ranking.selected.join("\n") + "\n"))?;
            if let Some(r) = &a.ranking {
                write_text(r, &ranking_tsv(&ranking))?;
                log.output(r);
            }
            log.output(&a.out);
            Ok(a.out.clone())
        }
    }
}

fn phantom(a: &PhantomArgs, log: &mut RunLog) -> Result<PathBuf, CliError> {
    if a.min_stacks == 0 || a.min_stacks > a.max_stacks {
        return Err(CliError::Validation("need 1 <= --min-stacks <= --max-stacks".into()));
    }
    let cfg = DatasetConfig {
        n_sites: a.sites,
        n_scanners_per_site: a.scanners_per_site,
        n_subjects_per_scanner: a.subjects_per_scanner,
        stacks_per_subject: (a.min_stacks, a.max_stacks),
        master_seed: a.seed,
        rater_noise: a.rater_noise,
        pure_test_scanners: a.pure_test_scanners,
        ..DatasetConfig::default()
    };
    log.seed("master", a.seed).set("config", format!("{cfg:?}"));
    let ds = write_phantom_dataset(&a.out, &cfg).map_err(|e| match e {
        crate::phantom_io::PhantomIoError::Phantom(p) => validation(p),
        other => runtime(other),
    })?;
    println!("wrote {} stacks to {}", ds.records.len(), a.out.display());
    log.output(&a.out);
    Ok(a.out.clone())
}

fn serve(a: &ServeArgs, log: &mut RunLog) -> Result<PathBuf, CliError> {
    use crate::service::ServiceError;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(runtime)?;
    log.set("bind", a.bind);
    println!("serving {} on http://{}", a.reports.display(), a.bind);
    rt.block_on(crate::service::serve(&a.reports, &a.ratings, a.bind)).map_err(|e| match e {
        ServiceError::AddressInUse(_) | ServiceError::Io { .. } => runtime(e),
        _ => validation(e),
    })?;
    log.output(&a.ratings);
    Ok(a.reports.clone())
}

fn aggregate(a: &AggregateArgs, log: &mut RunLog) -> Result<PathBuf, CliError> {
    require_file(&a.ratings)?;
    let records = read_ratings(&a.ratings).map_err(validation)?;
    let order = match &a.manifest {
        Some(m) => {
            require_file(m)?;
            Some(load_manifest(m).map_err(validation)?.into_iter().map(|r| r.stack_id).collect::<Vec<_>>())
        }
        None => None,
    };
    let policy = match a.policy {
        PolicyArg::LatestPerRater => AggregationPolicy::LatestPerRater { primary: a.primary.clone() },
        PolicyArg::MeanAcrossRaters => AggregationPolicy::MeanAcrossRaters,
    };
    log.set("policy", format!("{policy:?}"));
    let agg = aggregate_ratings(&records, &policy, order.as_deref()).map_err(validation)?;
    for id in &agg.unknown {
        eprintln!("warning: skipped ratings of unknown stack `{id}`");
        log.note(format!("unknown stack id {id}"));
    }
    write_labels(&a.out, &agg.labels).map_err(runtime)?;
    if let Some(p) = &a.paired {
        write_paired(p, &agg.paired).map_err(runtime)?;
        log.output(p);
    }
    let mut pairs: Vec<(&str, &str)> = agg.paired.iter().map(|p| (p.rater_a.as_str(), p.rater_b.as_str())).collect();
    pairs.sort_unstable();
    pairs.dedup();
    for (ra, rb) in pairs {
        let (x, y) = paired_columns(&agg.paired, ra, rb);
        if let Ok(ag) = agreement_metrics(&x, &y, EXCLUDE_THRESHOLD) {
            let f = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.3}"));
            println!("{ra} vs {rb}: n={} pearson_r={} kappa={}", x.len(), f(ag.pearson), f(ag.kappa));
        }
    }
    println!("wrote {} labels to {}", agg.labels.len(), a.out.display());
    log.output(&a.out);
    Ok(a.out.clone())
}

fn extract(a: &ExtractArgs, jobs: usize, log: &mut RunLog) -> Result<PathBuf, CliError> {
    let (_, records) = a.data.load()?;
    let mut opts = ExtractOptions { fallback_mask: a.fallback_mask, ..ExtractOptions::default() };
    if let Some(p) = &a.label_mapping {
        require_file(p)?;
        opts.label_mapping = read_label_mapping(p).map_err(validation)?;
    } else {
        opts.label_mapping = LabelMerge::fetal_default();
    }
    if let Some(p) = &a.dl_sidecar {
        require_file(p)?;
        opts.dl = read_dl_sidecar(p).map_err(validation)?;
    }
    let catalogue = build_catalogue(&CatalogueConfig::default()).map_err(validation)?;
    log.set("iqms", catalogue.len()).set("fallback_mask", a.fallback_mask);
    let extractions = extract_all(&records, &catalogue, &opts, jobs).map_err(runtime)?;
    let vectors: Vec<_> = extractions.into_iter().map(|e| e.vector).collect();
    export_csv(&vectors, &records, &a.out).map_err(runtime)?;
    println!("extracted {} IQMs for {} stacks into {}", catalogue.len(), records.len(), a.out.display());
    log.output(&a.out);
    Ok(a.out.clone())
}

fn evaluate_cmd(a: &EvaluateArgs, log: &mut RunLog) -> Result<PathBuf, CliError> {
    let data = a.input.load()?;
    let reduced = a.features.as_deref().map(read_feature_list).transpose()?;
    let protocol = match a.protocol {
        ProtocolArg::SubjectCv => Protocol::SubjectCv { k: a.k },
        ProtocolArg::Loso => Protocol::Loso,
        ProtocolArg::PureTest => Protocol::PureTest,
    };
    let s = EvalSettings {
        protocol,
        task: a.task.into(),
        repetitions: a.repetitions,
        seed: a.forest.seed,
        forest: a.forest.params(),
        exclude_threshold: a.forest.exclude_threshold,
    };
    log.seed("master", s.seed).set("protocol", protocol.name()).set("task", s.task.name()).set("repetitions", s.repetitions);
    let reports = evaluate(&data, &s, reduced.as_deref()).map_err(runtime)?;
    if let Some(r) = reports.first() {
        for (i, seed) in r.repetition_seeds.iter().enumerate() {
            log.seed(&format!("repetition_{i}"), *seed);
        }
    }
    let table = table2_tsv(&reports);
    print!("{table}");
    write_text(&a.out, &table)?;
    let per = a.per_scanner.clone().unwrap_or_else(|| with_suffix(&a.out, ".per_scanner.tsv"));
    write_text(&per, &per_scanner_tsv(&reports))?;
    log.output(&a.out).output(&per);
    if let Some(f) = &a.folds {
        write_text(f, &folds_tsv(&reports))?;
        log.output(f);
    }
    Ok(a.out.clone())
}

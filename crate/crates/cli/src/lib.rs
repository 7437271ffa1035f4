//! Command-line front end: `train`, `predict`, `experiment`, `serve`, `synth`.
//!
//! Exit codes: 0 success (including all-neutral and no-signal answers),
//! 2 usage or input error, 1 internal error.

use std::fs;
use std::io::{self, Read};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use polarcascade::cascade::{
    tepc_predict, two_step_predict, CascadeConfig, CascadeError, CascadeVerdict, FusionMode,
    MlpNeutralDetector, PolarityScore, PoolMembershipDetector, SentenceAudit,
};
use polarcascade::corpus::{load_jsonl, save_jsonl, Label};
use polarcascade::embed::{load_table, Pooling, WordVectorTable};
use polarcascade::eval::{dilution_experiment, spearman_rho, Contrast, RankedEvalSet, MAX_DILUTION};
use polarcascade::nnet::{load_model, save_model, MlpModel, ModelMetadata, TrainConfig};
use polarcascade::pipeline::{
    evr_contrast, grid_search, held_out_sets, train_classifier, training_data, GridSpec,
    SyntheticSetup, TaskKind, DEFAULT_TRAIN_FRACTION, DESK_DIM, DESK_VOCAB_PER_SET,
};
use polarcascade::textproc::split_sentences;
use polarcascade_service::{
    AppState, CacheConfig, FetchConfig, ModelPaths, ModelRegistry, RegistryHandle, ServiceConfig,
};
use serde_json::json;

/// Failure split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, missing or malformed input files (exit 2).
    Input(anyhow::Error),
    /// Anything else (exit 1).
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(e) | CliError::Internal(e) => write!(f, "{e:#}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn input<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Input(e.into())
}

fn internal<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Internal(e.into())
}

fn input_msg(msg: impl std::fmt::Display) -> CliError {
    CliError::Input(anyhow::anyhow!("{msg}"))
}

#[derive(Debug, Parser)]
#[command(name = "polarcascade", version, about = "Political polarity of long text with a neutral-sentence filter")]
pub struct Cli {
    /// Word-vector table (text format: `token v1 .. vD` per line).
    #[arg(long, global = true, env = "POLARCASCADE_EMBEDDINGS")]
    pub embeddings: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Only log errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the polarity or the neutral-sentence classifier.
    Train(TrainArgs),
    /// Score text with the baseline or the two-step cascade.
    Predict(PredictArgs),
    /// Run an evaluation and write its CSV.
    Experiment(ExperimentArgs),
    /// Run the HTTP inference service.
    Serve(ServeArgs),
    /// Generate the synthetic three-vocabulary corpus and a random vector table.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_parser = parse_task)]
    pub kind: TaskKind,
    /// Labeled dataset, one JSON record per line.
    #[arg(long)]
    pub data: PathBuf,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    /// Hidden layer widths, comma separated; empty for logistic regression.
    #[arg(long, default_value = "64,32")]
    pub hidden: String,
    #[arg(long, default_value_t = Pooling::Average)]
    pub pooling: Pooling,
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    pub train_fraction: f64,
    /// Choose hyperparameters by k-fold cross-validation on the train side.
    #[arg(long)]
    pub grid: bool,
    /// Learning rates to search, comma separated.
    #[arg(long, default_value = "0.01,0.05,0.1")]
    pub grid_lr: String,
    /// Architectures to search, separated by `;` (e.g. "64,32;32;").
    #[arg(long, default_value = "64,32;32")]
    pub grid_hidden: String,
    /// L2 strengths to search, comma separated.
    #[arg(long, default_value = "0,0.0001")]
    pub grid_l2: String,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Also write the metrics report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Tepc,
    TwoStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Plain,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fusion {
    Fused,
    SentenceMean,
}

#[derive(Debug, Args)]
pub struct CascadeArgs {
    /// Drop sentences whose neutral probability exceeds this.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Answer all-neutral when fewer sentences than this fraction survive.
    #[arg(long, default_value_t = 0.0)]
    pub min_kept_fraction: f64,
    #[arg(long, value_enum, default_value_t = Fusion::Fused)]
    pub fusion: Fusion,
}

impl CascadeArgs {
    fn config(&self, pooling: Pooling) -> CliResult<CascadeConfig> {
        let cfg = CascadeConfig {
            neutral_threshold: self.threshold,
            min_kept_fraction: self.min_kept_fraction,
            pooling,
            fusion: match self.fusion {
                Fusion::Fused => FusionMode::Fused,
                Fusion::SentenceMean => FusionMode::SentenceMean,
            },
        };
        cfg.validate().map_err(input)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub polarity: PathBuf,
    /// Neutral-sentence model; required for two-step mode.
    #[arg(long)]
    pub neutral: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::TwoStep)]
    pub mode: Mode,
    /// Text to score. Without --text or --file, stdin is read.
    #[arg(long, conflicts_with = "file")]
    pub text: Option<String>,
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Plain)]
    pub output: OutputFormat,
    #[command(flatten)]
    pub cascade: CascadeArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Dilute,
    Evr,
    Spearman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ContrastArg {
    LeftRight,
    BiasNeutral,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub kind: ExperimentKind,
    /// Labeled dataset (dilute, evr) or `id,human,machine` CSV (spearman).
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Polarity model (dilute).
    #[arg(long)]
    pub polarity: Option<PathBuf>,
    /// Neutral model (dilute); replaced by a pool-membership oracle with --oracle.
    #[arg(long)]
    pub neutral: Option<PathBuf>,
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = MAX_DILUTION)]
    pub max_k: usize,
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    pub train_fraction: f64,
    #[arg(long, value_enum, default_value_t = ContrastArg::BiasNeutral)]
    pub contrast: ContrastArg,
    /// Difference vectors sampled for evr.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Principal components for evr; defaults to the vector dimension.
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long, default_value_t = Pooling::Average)]
    pub pooling: Pooling,
    #[command(flatten)]
    pub cascade: CascadeArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "POLARCASCADE_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    #[arg(long, env = "POLARCASCADE_POLARITY_MODEL")]
    pub polarity: PathBuf,
    #[arg(long, env = "POLARCASCADE_NEUTRAL_MODEL")]
    pub neutral: PathBuf,
    #[arg(long, env = "POLARCASCADE_FETCH_TIMEOUT", default_value_t = 10)]
    pub fetch_timeout_secs: u64,
    /// Enable the on-disk response cache in this directory.
    #[arg(long, env = "POLARCASCADE_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 3600)]
    pub cache_ttl_secs: u64,
    #[arg(long, default_value_t = Pooling::Average)]
    pub pooling: Pooling,
    #[command(flatten)]
    pub cascade: CascadeArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output dataset.
    #[arg(long)]
    pub out: PathBuf,
    /// Output vector table; falls back to --embeddings.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub per_class: usize,
    #[arg(long, default_value_t = DESK_VOCAB_PER_SET)]
    pub vocab_per_set: usize,
    #[arg(long, default_value_t = DESK_DIM)]
    pub dim: usize,
}

fn parse_task(s: &str) -> Result<TaskKind, String> {
    s.parse()
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| input_msg(format!("invalid {what} {t:?}"))))
        .collect()
}

/// Parses, runs and maps the outcome to an exit code.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let ctx = Context {
        embeddings: cli.embeddings,
        seed: cli.seed,
    };
    match cli.command {
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Predict(a) => cmd_predict(&ctx, a),
        Command::Experiment(a) => cmd_experiment(&ctx, a),
        Command::Serve(a) => cmd_serve(&ctx, a),
        Command::Synth(a) => cmd_synth(&ctx, a),
    }
}

struct Context {
    embeddings: Option<PathBuf>,
    seed: u64,
}

impl Context {
    fn table(&self) -> CliResult<WordVectorTable> {
        let path = self
            .embeddings
            .as_ref()
            .ok_or_else(|| input_msg("--embeddings is required for this command"))?;
        log::info!("loading vectors from {}", path.display());
        load_table(path).map_err(|e| at_path(path, e))
    }
}

/// Input error naming `path`, unless the message already does.
fn at_path(path: &Path, e: impl std::fmt::Display) -> CliError {
    let (shown, msg) = (path.display().to_string(), e.to_string());
    if msg.contains(&shown) {
        input_msg(msg)
    } else {
        input_msg(format!("{shown}: {msg}"))
    }
}

fn load_model_at(path: &Path) -> CliResult<(MlpModel, ModelMetadata)> {
    load_model(path).map_err(|e| at_path(path, e))
}

fn load_data(path: &Path) -> CliResult<Vec<polarcascade::corpus::LabeledExample>> {
    load_jsonl(path).map_err(|e| at_path(path, e))
}

fn created_at() -> u64 {
    // Honour SOURCE_DATE_EPOCH so retraining with the same flags yields
    // byte-identical model files.
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

fn cmd_train(ctx: &Context, a: TrainArgs) -> CliResult<()> {
    let table = ctx.table()?;
    let data = load_data(&a.data)?;
    let mut cfg = TrainConfig {
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        l2: a.l2,
        hidden_sizes: parse_list(&a.hidden, "hidden size")?,
        seed: ctx.seed,
    };
    cfg.validate().map_err(input)?;
    let mut grid_report = None;
    if a.grid {
        let grid = GridSpec {
            learning_rates: parse_list(&a.grid_lr, "learning rate")?,
            hidden_sizes: a
                .grid_hidden
                .split(';')
                .map(|h| parse_list(h, "hidden size"))
                .collect::<CliResult<_>>()?,
            l2: parse_list(&a.grid_l2, "l2")?,
        };
        let split = polarcascade::corpus::split(&data, a.train_fraction, ctx.seed).map_err(input)?;
        let train = training_data(a.kind, &split.train, &table, a.pooling);
        log::info!(
            "grid search: {} candidates x {} folds on {} examples",
            grid.candidates(&cfg).len(),
            a.folds,
            train.len()
        );
        let result = grid_search(&train, table.dim(), &grid, &cfg, a.folds).map_err(input)?;
        let best = result.best();
        log::info!(
            "best: lr={} hidden={:?} l2={} mean validation accuracy {:.4}",
            best.config.learning_rate,
            best.config.hidden_sizes,
            best.config.l2,
            best.mean_validation_accuracy
        );
        grid_report = Some(
            result
                .candidates
                .iter()
                .map(|c| {
                    json!({
                        "learning_rate": c.config.learning_rate,
                        "hidden_sizes": c.config.hidden_sizes,
                        "l2": c.config.l2,
                        "mean_validation_accuracy": c.mean_validation_accuracy,
                        "param_count": c.param_count,
                    })
                })
                .collect::<Vec<_>>(),
        );
        cfg = best.config.clone();
    }
    log::info!("training {} classifier on {} records", a.kind, data.len());
    let report =
        train_classifier(a.kind, &data, &table, a.pooling, &cfg, a.train_fraction).map_err(|e| match e {
            polarcascade::pipeline::PipelineError::Nnet(n @ polarcascade::nnet::NnetError::Diverged { .. }) => {
                internal(n)
            }
            other => input(other),
        })?;
    let meta = ModelMetadata {
        embedding_dim: table.dim(),
        pooling_mode: a.pooling,
        trained_on: a
            .data
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        created_at: created_at(),
    };
    save_model(&a.out, &report.model, &meta).map_err(internal)?;
    println!(
        "kind={} train_accuracy={:.4} test_accuracy={:.4} train={} test={} model={}",
        a.kind,
        report.train_accuracy,
        report.test_accuracy,
        report.train_size,
        report.test_size,
        a.out.display()
    );
    if let Some(path) = a.report {
        let body = json!({
            "kind": a.kind,
            "train_accuracy": report.train_accuracy,
            "test_accuracy": report.test_accuracy,
            "train_size": report.train_size,
            "test_size": report.test_size,
            "learning_rate": cfg.learning_rate,
            "epochs": cfg.epochs,
            "l2": cfg.l2,
            "hidden_sizes": cfg.hidden_sizes,
            "seed": cfg.seed,
            "grid": grid_report,
        });
        polarcascade::io::write_atomic(&path, |w| {
            serde_json::to_writer_pretty(&mut *w, &body).map_err(io::Error::other)?;
            writeln!(w)
        })
        .map_err(internal)?;
    }
    Ok(())
}


fn read_input(a: &PredictArgs) -> CliResult<String> {
    let text = match (&a.text, &a.file) {
        (Some(t), _) => t.clone(),
        (None, Some(p)) => fs::read_to_string(p).map_err(|e| at_path(p, e))?,
        (None, None) => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(input)?;
            s
        }
    };
    if text.trim().is_empty() {
        return Err(input_msg("input text is empty"));
    }
    Ok(text)
}

/// What `predict` reports, before formatting.
struct Answer {
    score: Option<PolarityScore>,
    /// "all_neutral" or "no_signal" when there is no score.
    reason: &'static str,
    kept: usize,
    total: usize,
    verdict: Option<CascadeVerdict>,
}

fn cmd_predict(ctx: &Context, a: PredictArgs) -> CliResult<()> {
    let table = ctx.table()?;
    let text = read_input(&a)?;
    let (polarity, meta) = load_model_at(&a.polarity)?;
    let cfg = a.cascade.config(meta.pooling_mode)?;
    let total = split_sentences(&text).len();
    let answer = match a.mode {
        Mode::Tepc => match tepc_predict(&polarity, &table, &text, cfg.pooling) {
            Ok(s) => Answer {
                score: Some(s),
                reason: "",
                kept: total,
                total,
                verdict: None,
            },
            Err(CascadeError::NoSignal) => Answer {
                score: None,
                reason: "no_signal",
                kept: 0,
                total,
                verdict: None,
            },
            Err(e) => return Err(cascade_err(e)),
        },
        Mode::TwoStep => {
            let path = a
                .neutral
                .as_ref()
                .ok_or_else(|| input_msg("--neutral is required in two-step mode"))?;
            let (neutral, _) = load_model_at(path)?;
            let v = two_step_predict(&polarity, &neutral, &table, &text, &cfg).map_err(cascade_err)?;
            Answer {
                score: v.verdict.score().copied(),
                reason: "all_neutral",
                kept: v.kept.len(),
                total: v.sentence_count(),
                verdict: Some(v),
            }
        }
    };
    match a.output {
        OutputFormat::Plain => println!("{}", plain_line(&answer)),
        OutputFormat::Structured => println!("{}", structured_record(&answer, &text)),
    }
    Ok(())
}

fn cascade_err(e: CascadeError) -> CliError {
    match e {
        CascadeError::EmptyInput | CascadeError::DimMismatch { .. } | CascadeError::InvalidConfig(_) => input(e),
        other => internal(other),
    }
}

fn plain_line(a: &Answer) -> String {
    match &a.score {
        Some(s) => format!("score={:+.2} bucket={} kept={}/{}", s.score, s.bucket, a.kept, a.total),
        None => format!("score=none bucket={} kept={}/{}", a.reason, a.kept, a.total),
    }
}

/// One dataset record (`id`, `text`, `label`) plus the full verdict, so the
/// output can be fed back through the dataset loader.
fn structured_record(a: &Answer, text: &str) -> String {
    let label = match &a.score {
        Some(s) if s.is_right() => Label::Right,
        Some(_) => Label::Left,
        None => Label::Neutral,
    };
    let audit = |rows: &[SentenceAudit]| serde_json::to_value(rows).expect("serializable");
    let record = json!({
        "id": "prediction",
        "text": text,
        "label": label,
        "score": a.score.map(|s| s.score),
        "probability_right": a.score.map(|s| s.probability_right),
        "bucket": a.score.map(|s| s.bucket.as_str()).unwrap_or(a.reason),
        "kept_count": a.kept,
        "sentence_count": a.total,
        "verdict": a.verdict.as_ref().map(|v| json!({
            "verdict": v.verdict,
            "kept": audit(&v.kept),
            "dropped": audit(&v.dropped),
            "fused_text": v.fused_text,
        })),
    });
    serde_json::to_string(&record).expect("serializable")
}

fn cmd_experiment(ctx: &Context, a: ExperimentArgs) -> CliResult<()> {
    match a.kind {
        ExperimentKind::Spearman => {
            let raw = fs::read_to_string(&a.data).map_err(|e| at_path(&a.data, e))?;
            let set = RankedEvalSet::from_csv(&raw).map_err(|e| at_path(&a.data, e))?;
            let rho = spearman_rho(&set).map_err(input)?;
            if let Some(out) = &a.out {
                polarcascade::io::write_atomic(out, |w| writeln!(w, "n,spearman_rho\n{},{rho}", set.len()))
                    .map_err(internal)?;
            }
            println!("spearman_rho={rho} n={}", set.len());
        }
        ExperimentKind::Evr => {
            let table = ctx.table()?;
            let data = load_data(&a.data)?;
            let contrast = match a.contrast {
                ContrastArg::LeftRight => Contrast::LeftRight,
                ContrastArg::BiasNeutral => Contrast::BiasNeutral,
            };
            let components = a.components.unwrap_or(table.dim());
            let report = evr_contrast(contrast, &data, &table, a.pooling, a.samples, components, ctx.seed)
                .map_err(|e| match e {
                    polarcascade::pipeline::PipelineError::Eval(
                        ev @ polarcascade::eval::EvalError::NoConvergence { .. },
                    ) => internal(ev),
                    other => input(other),
                })?;
            if let Some(out) = &a.out {
                report.save_csv(out).map_err(internal)?;
            }
            let total: f64 = report.ratios.iter().sum();
            println!(
                "contrast={contrast} samples={} components={} first_ratio={:.6} ratio_sum={total:.12}",
                report.sample_count,
                report.ratios.len(),
                report.ratios.first().copied().unwrap_or(0.0)
            );
        }
        ExperimentKind::Dilute => {
            let table = ctx.table()?;
            let data = load_data(&a.data)?;
            let pol_path = a
                .polarity
                .as_ref()
                .ok_or_else(|| input_msg("--polarity is required for dilute"))?;
            let (polarity, meta) = load_model_at(pol_path)?;
            let cfg = a.cascade.config(meta.pooling_mode)?;
            let (polar, pool) = held_out_sets(&data, a.train_fraction, ctx.seed).map_err(input)?;
            log::info!("diluting {} held-out polar examples with {} pool sentences", polar.len(), pool.len());
            let curve = if a.oracle {
                let det = PoolMembershipDetector::new(&pool);
                dilution_experiment(&polarity, &det, &table, &polar, &pool, ctx.seed, a.max_k, &cfg)
            } else {
                let path = a
                    .neutral
                    .as_ref()
                    .ok_or_else(|| input_msg("--neutral or --oracle is required for dilute"))?;
                let (neutral, _) = load_model_at(path)?;
                let det = MlpNeutralDetector {
                    model: &neutral,
                    table: &table,
                    pooling: cfg.pooling,
                };
                dilution_experiment(&polarity, &det, &table, &polar, &pool, ctx.seed, a.max_k, &cfg)
            }
            .map_err(input)?;
            if let Some(out) = &a.out {
                curve.save_csv(out).map_err(internal)?;
            }
            let col = |f: fn(&polarcascade::eval::DilutionPoint) -> f64| {
                curve.points.iter().map(|p| format!("{:.3}", f(p))).collect::<Vec<_>>().join(",")
            };
            println!(
                "n={} tepc=[{}] two_step=[{}]",
                polar.len(),
                col(|p| p.tepc_accuracy),
                col(|p| p.two_step_accuracy)
            );
        }
    }
    Ok(())
}

fn cmd_serve(ctx: &Context, a: ServeArgs) -> CliResult<()> {
    let embeddings = ctx
        .embeddings
        .clone()
        .ok_or_else(|| input_msg("--embeddings is required for serve"))?;
    let paths = ModelPaths {
        polarity: a.polarity.clone(),
        neutral: a.neutral.clone(),
        embeddings,
    };
    let cfg = a.cascade.config(a.pooling)?;
    let registry = ModelRegistry::load(&paths, cfg).map_err(input)?;
    log::info!("models loaded, id {}", registry.model_id());
    let service_cfg = ServiceConfig {
        fetch: FetchConfig {
            timeout: Duration::from_secs(a.fetch_timeout_secs),
            ..FetchConfig::default()
        },
        cache: a.cache_dir.map(|dir| CacheConfig {
            dir,
            ttl: Duration::from_secs(a.cache_ttl_secs),
        }),
        ..ServiceConfig::default()
    };
    let state = AppState::new(RegistryHandle::new(registry), service_cfg).map_err(internal)?;
    let rt = tokio::runtime::Runtime::new().map_err(internal)?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(a.listen)
            .await
            .map_err(|e| internal(anyhow::anyhow!("cannot bind {}: {e}", a.listen)))?;
        let local = listener.local_addr().map_err(internal)?;
        log::info!("listening on http://{local}");
        polarcascade_service::serve_on(listener, state, shutdown_signal())
            .await
            .map_err(internal)
    })?;
    log::info!("shut down");
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

fn cmd_synth(ctx: &Context, a: SynthArgs) -> CliResult<()> {
    let vectors = a
        .vectors
        .clone()
        .or_else(|| ctx.embeddings.clone())
        .ok_or_else(|| input_msg("give --vectors or --embeddings for the vector table output"))?;
    let setup = SyntheticSetup::new(a.per_class, a.vocab_per_set, a.dim, ctx.seed).map_err(input)?;
    save_jsonl(&a.out, &setup.corpus).map_err(internal)?;
    setup.table.save(&vectors).map_err(internal)?;
    println!(
        "examples={} vocab={} dim={} data={} vectors={}",
        setup.corpus.len(),
        setup.table.vocab_size(),
        setup.table.dim(),
        a.out.display(),
        vectors.display()
    );
    Ok(())
}

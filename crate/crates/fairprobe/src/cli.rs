//! The `fairprobe` command line.
//!
//! Every command writes a [`RunReport`]. Exit status is 0 on success, 1 when
//! the run or the model failed, and 2 for usage or configuration errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairprobe_core::logistic::LogisticParams;
use fairprobe_core::retrain::{retrain_loop, Trainer, TrainerSpec};
use fairprobe_core::tree::TreeParams;
use fairprobe_core::{
    estimate_fraction, run_audit_partial, Clock, DiscriminationConfig, EstimationParams, NativeModel, PointInput,
    SearchConfig, Strategy,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::load_csv;
use crate::domain_file::read_domain;
use crate::error::{Error, Result};
use crate::handle::{domain_digest, model_digest, sha256_hex, ModelHandle};
use crate::model_file::write_model;
use crate::report::{
    CompareEcho, ComparisonCell, ComparisonRow, ConfigEcho, Counters, EstimationEcho, EstimationRecord, RetrainEcho,
    RetrainRecord, RunReport, SearchEcho,
};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "FAIRPROBE_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "fairprobe",
    version,
    about = "Search classifiers for individually unfair decisions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a native model on a labeled CSV file.
    Train(TrainArgs),
    /// Search a model for discriminatory inputs.
    Audit(AuditArgs),
    /// Estimate the fraction of discriminatory inputs by sampling.
    Estimate(EstimateArgs),
    /// Retrain with the inputs found by an audit.
    Retrain(RetrainArgs),
    /// Run every strategy on the same input budget.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Logistic,
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum StrategyArg {
    AequitasRandom,
    SemiDirected,
    FullyDirected,
    BaselineRandom,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::AequitasRandom => Strategy::AequitasRandom,
            StrategyArg::SemiDirected => Strategy::SemiDirected,
            StrategyArg::FullyDirected => Strategy::FullyDirected,
            StrategyArg::BaselineRandom => Strategy::BaselineRandom,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Hyperparams {
    /// Gradient descent epochs (logistic).
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    /// Gradient descent step size (logistic).
    #[arg(long, default_value_t = 0.5)]
    pub learning_rate: f64,
    /// Maximum depth (tree).
    #[arg(long, default_value_t = 8)]
    pub max_depth: usize,
    /// Minimum rows per leaf (tree).
    #[arg(long, default_value_t = 1)]
    pub min_leaf: usize,
}

impl Hyperparams {
    fn trainer(&self, kind: ModelKind, seed: u64) -> TrainerSpec {
        match kind {
            ModelKind::Logistic => TrainerSpec::Logistic(LogisticParams {
                epochs: self.epochs,
                learning_rate: self.learning_rate,
                seed,
            }),
            ModelKind::Tree => TrainerSpec::Tree(TreeParams {
                max_depth: self.max_depth,
                min_leaf: self.min_leaf,
                seed,
            }),
        }
    }

    fn echo(&self, kind: ModelKind, seed: u64) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        match kind {
            ModelKind::Logistic => {
                map.insert("epochs".into(), self.epochs.to_string());
                map.insert("learning_rate".into(), format!("{:?}", self.learning_rate));
            }
            ModelKind::Tree => {
                map.insert("max_depth".into(), self.max_depth.to_string());
                map.insert("min_leaf".into(), self.min_leaf.to_string());
            }
        }
        map.insert("seed".into(), seed.to_string());
        map
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub domain_file: PathBuf,
    #[arg(long)]
    pub csv_file: PathBuf,
    #[arg(long, value_enum)]
    pub model_kind: ModelKind,
    #[arg(long, default_value = "label")]
    pub label_column: String,
    #[command(flatten)]
    pub hyperparams: Hyperparams,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_path: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.001)]
    pub delta_v: f64,
    #[arg(long, default_value_t = 0.001)]
    pub delta_pr: f64,
    #[arg(long, default_value_t = 1000)]
    pub global_trials: u64,
    #[arg(long, default_value_t = 1000)]
    pub local_trials: u64,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub domain_file: PathBuf,
    /// A model file, or `exec:<command>` for an external model.
    #[arg(long)]
    pub model_ref: String,
    #[arg(long, value_enum, default_value = "fully_directed")]
    pub strategy: StrategyArg,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_findings: Option<u64>,
    /// Stop after this many generated inputs.
    #[arg(long)]
    pub max_inputs: Option<u64>,
    /// Stop after this many seconds.
    #[arg(long)]
    pub time_budget: Option<f64>,
    /// Findings copied into the report sample.
    #[arg(long, default_value_t = 1000)]
    pub findings_cap: usize,
    #[arg(long)]
    pub report_out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EstimationArgs {
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Samples per trial.
    #[arg(long = "m", default_value_t = 1000)]
    pub m: u64,
    /// Number of trials.
    #[arg(long = "k", default_value_t = 100)]
    pub k: u64,
}

impl EstimationArgs {
    fn params(&self) -> Result<EstimationParams> {
        let params = EstimationParams {
            samples_per_trial: self.m,
            trials: self.k,
            discrimination: DiscriminationConfig::new(self.gamma)?,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub domain_file: PathBuf,
    #[arg(long)]
    pub model_ref: String,
    #[command(flatten)]
    pub estimation: EstimationArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub report_out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RetrainArgs {
    #[arg(long)]
    pub domain_file: PathBuf,
    #[arg(long, value_enum)]
    pub model_kind: ModelKind,
    #[arg(long)]
    pub csv_file: PathBuf,
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// Report of an audit of the model trained from the same CSV.
    #[arg(long)]
    pub findings_file: PathBuf,
    #[command(flatten)]
    pub hyperparams: Hyperparams,
    /// Seed the models are trained with.
    #[arg(long, default_value_t = 0)]
    pub train_seed: u64,
    #[command(flatten)]
    pub estimation: EstimationArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub report_out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub domain_file: PathBuf,
    #[arg(long)]
    pub model_ref: String,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    /// Generated inputs per strategy and seed.
    #[arg(long)]
    pub budget: u64,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub report_out: PathBuf,
}

/// Seed from the flag, then `FAIRPROBE_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{SEED_ENV}=`{text}` is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(Error::Usage(format!("{SEED_ENV}: {e}"))),
    }
}

/// Wall clock started at construction.
pub struct Stopwatch(Instant);

impl Stopwatch {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Clock for Stopwatch {
    fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}

fn search_config(args: &SearchArgs, strategy: Strategy, seed: u64) -> Result<SearchConfig> {
    let cfg = SearchConfig {
        discrimination: DiscriminationConfig::new(args.gamma)?,
        global_trials: args.global_trials,
        local_trials: args.local_trials,
        delta_v: args.delta_v,
        delta_pr: args.delta_pr,
        strategy,
        seed,
        ..SearchConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_train(args: &TrainArgs) -> Result<NativeModel> {
    let seed = resolve_seed(args.seed)?;
    let domain = read_domain(&args.domain_file)?;
    let data = load_csv(&args.csv_file, &domain, &args.label_column)?;
    let model = args.hyperparams.trainer(args.model_kind, seed).train(&data)?;
    write_model(&args.out_path, &model)?;
    Ok(model)
}

/// Runs the audit and writes the report, also when the model fails midway.
/// The returned report carries the failure in its `error` field.
pub fn cmd_audit(args: &AuditArgs) -> Result<RunReport> {
    let seed = resolve_seed(args.seed)?;
    let mut cfg = search_config(&args.search, args.strategy.into(), seed)?;
    cfg.max_findings = args.max_findings;
    cfg.max_inputs = args.max_inputs;
    cfg.time_budget = match args.time_budget {
        Some(secs) if !(secs.is_finite() && secs >= 0.0) => {
            return Err(Error::Usage(format!(
                "--time-budget must be a non-negative number, got {secs}"
            )))
        }
        Some(secs) => Some(Duration::from_secs_f64(secs)),
        None => None,
    };
    let domain = read_domain(&args.domain_file)?;
    let mut echo = ConfigEcho {
        domain_digest: domain_digest(&domain),
        model_digest: String::new(),
        model_ref: args.model_ref.clone(),
        findings_cap: args.findings_cap,
        search: Some(SearchEcho::from(&cfg)),
        estimation: None,
        retrain: None,
        compare: None,
    };
    let model = match ModelHandle::open(&args.model_ref, &domain) {
        Ok(m) => m,
        Err(e) => {
            let mut report = RunReport::new("audit", echo);
            report.error = Some(e.to_string());
            report.write(&args.report_out)?;
            return Ok(report);
        }
    };
    echo.model_digest = model.digest();

    let clock = Stopwatch::start();
    let (suite, failure) = run_audit_partial(&model, &domain, &cfg, &mut cfg.rng(), &clock);
    let mut report = RunReport::new("audit", echo);
    report.record_suite(&suite);
    report.error = failure.map(|e| e.to_string());
    report.write(&args.report_out)?;
    Ok(report)
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<RunReport> {
    let seed = resolve_seed(args.seed)?;
    let params = args.estimation.params()?;
    let domain = read_domain(&args.domain_file)?;
    let model = ModelHandle::open(&args.model_ref, &domain)?;
    let echo = ConfigEcho {
        domain_digest: domain_digest(&domain),
        model_digest: model.digest(),
        model_ref: args.model_ref.clone(),
        findings_cap: 0,
        search: None,
        estimation: Some(EstimationEcho {
            gamma: args.estimation.gamma,
            samples_per_trial: params.samples_per_trial,
            trials: params.trials,
            seed,
        }),
        retrain: None,
        compare: None,
    };
    let started = Instant::now();
    let result = estimate_fraction(&model, &domain, &params, &mut ChaCha8Rng::seed_from_u64(seed));
    let mut report = RunReport::new("estimate", echo);
    report.wall_time_secs = started.elapsed().as_secs_f64();
    match result {
        Ok(r) => report.estimation = Some(EstimationRecord::from(&r)),
        Err(e) => report.error = Some(e.to_string()),
    }
    report.write(&args.report_out)?;
    Ok(report)
}

/// Where `retrain` puts the final model: next to the report, with the
/// report's file stem and a `.model` extension.
pub fn retrained_model_path(report_out: &Path) -> PathBuf {
    report_out.with_extension("model")
}

pub fn cmd_retrain(args: &RetrainArgs) -> Result<RunReport> {
    let seed = resolve_seed(args.seed)?;
    let params = args.estimation.params()?;
    let domain = read_domain(&args.domain_file)?;
    let data = load_csv(&args.csv_file, &domain, &args.label_column)?;
    let findings_bytes = std::fs::read(&args.findings_file).map_err(|e| Error::io(&args.findings_file, e))?;
    let findings = RunReport::from_json(&String::from_utf8_lossy(&findings_bytes))?;

    let expected_domain = domain_digest(&domain);
    if findings.config.domain_digest != expected_domain {
        return Err(Error::DigestMismatch {
            what: "domain",
            expected: expected_domain,
            found: findings.config.domain_digest,
        });
    }
    let trainer = args.hyperparams.trainer(args.model_kind, args.train_seed);
    let initial = trainer.train(&data)?;
    let initial_digest = model_digest(&initial);
    if findings.config.model_digest != initial_digest {
        return Err(Error::DigestMismatch {
            what: "model",
            expected: initial_digest,
            found: findings.config.model_digest,
        });
    }
    let generated: Vec<PointInput> = findings.unique_inputs.iter().map(|v| PointInput(v.clone())).collect();
    if generated.is_empty() {
        return Err(Error::Core(fairprobe_core::Error::Contract(format!(
            "{} holds no discriminatory inputs; audit with a larger budget or another strategy first",
            args.findings_file.display()
        ))));
    }
    for x in &generated {
        domain.validate(x)?;
    }

    let echo = ConfigEcho {
        domain_digest: expected_domain,
        model_digest: initial_digest,
        model_ref: args.csv_file.display().to_string(),
        findings_cap: 0,
        search: None,
        estimation: Some(EstimationEcho {
            gamma: args.estimation.gamma,
            samples_per_trial: params.samples_per_trial,
            trials: params.trials,
            seed,
        }),
        retrain: Some(RetrainEcho {
            model_kind: match args.model_kind {
                ModelKind::Logistic => "logistic".into(),
                ModelKind::Tree => "tree".into(),
            },
            hyperparams: args.hyperparams.echo(args.model_kind, args.train_seed),
            csv_digest: sha256_hex(&std::fs::read(&args.csv_file).map_err(|e| Error::io(&args.csv_file, e))?),
            label_column: args.label_column.clone(),
            findings_digest: sha256_hex(&findings_bytes),
        }),
        compare: None,
    };
    let started = Instant::now();
    let outcome = retrain_loop(
        initial,
        &trainer,
        &data,
        &generated,
        &params,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )?;
    let model_path = retrained_model_path(&args.report_out);
    write_model(&model_path, &outcome.final_model)?;

    let mut report = RunReport::new("retrain", echo);
    report.wall_time_secs = started.elapsed().as_secs_f64();
    report.retrain = Some(RetrainRecord::new(
        &outcome,
        model_path.display().to_string(),
        model_digest(&outcome.final_model),
    ));
    report.write(&args.report_out)?;
    Ok(report)
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

/// One cell of the comparison: `strategy` on `seed` with at most `budget`
/// generated inputs. The baseline spends the whole budget on sampling.
pub fn comparison_config(search: &SearchArgs, strategy: Strategy, seed: u64, budget: u64) -> Result<SearchConfig> {
    let mut cfg = search_config(search, strategy, seed)?;
    cfg.max_inputs = Some(budget);
    if strategy == Strategy::BaselineRandom {
        cfg.global_trials = budget;
    }
    Ok(cfg)
}

pub fn cmd_compare(args: &CompareArgs) -> Result<RunReport> {
    if args.seeds.is_empty() {
        return Err(Error::Usage("--seeds needs at least one seed".into()));
    }
    for strategy in Strategy::ALL {
        comparison_config(&args.search, strategy, 0, args.budget)?;
    }
    let domain = read_domain(&args.domain_file)?;
    let model = ModelHandle::open(&args.model_ref, &domain)?;
    let echo = ConfigEcho {
        domain_digest: domain_digest(&domain),
        model_digest: model.digest(),
        model_ref: args.model_ref.clone(),
        findings_cap: 0,
        search: None,
        estimation: None,
        retrain: None,
        compare: Some(CompareEcho {
            seeds: args.seeds.clone(),
            budget: args.budget,
            gamma: args.search.gamma,
            global_trials: args.search.global_trials,
            local_trials: args.search.local_trials,
            delta_v: args.search.delta_v,
            delta_pr: args.search.delta_pr,
        }),
    };
    let started = Instant::now();
    let mut report = RunReport::new("compare", echo);
    let mut rows = Vec::new();
    let mut failure = None;
    'strategies: for strategy in Strategy::ALL {
        let mut runs = Vec::new();
        for &seed in &args.seeds {
            let cfg = comparison_config(&args.search, strategy, seed, args.budget)?;
            let clock = Stopwatch::start();
            let (suite, error) = run_audit_partial(&model, &domain, &cfg, &mut cfg.rng(), &clock);
            let counters = Counters::from_suite(&suite);
            runs.push(ComparisonCell {
                seed,
                inputs_generated: counters.inputs_generated,
                discriminatory_count: counters.discriminatory_count,
                percent_discriminatory: counters.percent_discriminatory,
                wall_time_secs: suite.wall_time.as_secs_f64(),
            });
            if let Some(e) = error {
                failure = Some(e.to_string());
                rows.push(comparison_row(strategy, runs));
                break 'strategies;
            }
        }
        rows.push(comparison_row(strategy, runs));
    }
    report.wall_time_secs = started.elapsed().as_secs_f64();
    report.comparison = Some(rows);
    report.error = failure;
    report.write(&args.report_out)?;
    Ok(report)
}

fn comparison_row(strategy: Strategy, runs: Vec<ComparisonCell>) -> ComparisonRow {
    let mut percents: Vec<f64> = runs.iter().filter_map(|r| r.percent_discriminatory).collect();
    let mut times: Vec<f64> = runs.iter().map(|r| r.wall_time_secs).collect();
    ComparisonRow {
        strategy: strategy.as_str().to_string(),
        median_percent: median(&mut percents),
        median_wall_time_secs: median(&mut times).unwrap_or(0.0),
        runs,
    }
}

fn summarize(report: &RunReport, out: &Path) {
    if let Some(c) = &report.counters {
        let pct = c
            .percent_discriminatory
            .map_or_else(|| "n/a".to_string(), |p| format!("{p:.3}%"));
        println!(
            "generated {} inputs, {} discriminatory ({pct}), {} distinct",
            c.inputs_generated, c.discriminatory_count, c.unique_discriminatory
        );
    }
    if let Some(e) = &report.estimation {
        println!(
            "estimated discriminatory fraction {:.4}% (95% CI {:.4}..{:.4}) over {} x {} samples",
            e.point_estimate, e.ci_low, e.ci_high, e.trials, e.samples_per_trial
        );
    }
    if let Some(r) = &report.retrain {
        let accepted = r.iterations.iter().filter(|it| it.accepted).count();
        println!(
            "{accepted} of {} rounds accepted; estimate {:.4}% -> {:.4}% ({:.2}% improvement, {:.2}% rows added)",
            r.iterations.len(),
            r.initial_estimate,
            r.final_estimate,
            r.improvement_percent,
            r.percent_added
        );
        println!("final model written to {}", r.final_model_path);
    }
    if let Some(rows) = &report.comparison {
        println!("{:<16} {:>14} {:>12}", "strategy", "median %disc", "median s");
        for row in rows {
            let pct = row
                .median_percent
                .map_or_else(|| "n/a".to_string(), |p| format!("{p:.3}"));
            println!("{:<16} {:>14} {:>12.3}", row.strategy, pct, row.median_wall_time_secs);
        }
    }
    println!("report written to {}", out.display());
}

fn execute(command: &Command) -> Result<i32> {
    let report = match command {
        Command::Train(args) => {
            let model = cmd_train(args)?;
            println!("trained {} model written to {}", model.kind(), args.out_path.display());
            return Ok(0);
        }
        Command::Audit(args) => (cmd_audit(args)?, &args.report_out),
        Command::Estimate(args) => (cmd_estimate(args)?, &args.report_out),
        Command::Retrain(args) => (cmd_retrain(args)?, &args.report_out),
        Command::Compare(args) => (cmd_compare(args)?, &args.report_out),
    };
    summarize(&report.0, report.1);
    Ok(match &report.0.error {
        Some(e) => {
            eprintln!("error: {e} (partial report written)");
            1
        }
        None => 0,
    })
}

/// Parses `args` (program name first) and runs the command; returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

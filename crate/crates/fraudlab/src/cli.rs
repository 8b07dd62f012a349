//! Command-line interface.
//!
//! Every flag is listed in [`FLAGS`] and documented in the help output:
//!
//! ```
//! let help = fraudlab::cli::help_text();
//! for flag in fraudlab::cli::FLAGS {
//!     assert!(help.contains(flag), "{flag} is missing from --help");
//! }
//! ```

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};
use fraudlab_core::dataset::fit_robust_scaler;
use fraudlab_core::metrics::{evaluate_with, EvalContext};
use fraudlab_core::models::ModelSpec;
use fraudlab_core::resampling::{hybrid_sizes, SelectionCriterion};
use fraudlab_core::rng::derive_seed;
use fraudlab_core::{Dataset, ResamplePlan};
use log::info;

use crate::config::{
    parse_model, parse_synthetic, DataSource, ExperimentConfig, Format, DEFAULT_OUT, OUT_ENV,
};
use crate::error::{exit, Error, Result};
use crate::exec::RayonExecutor;
use crate::experiments::{self, ExperimentKind};
use crate::io::{load_model, save_csv, save_model, ModelDocument};
use crate::report::{emit_sweep, markdown_table, prepare_output, to_json, Emitter};

/// Every long flag the tool accepts.
pub const FLAGS: [&str; 17] = [
    "--data",
    "--synthetic",
    "--seed",
    "--split",
    "--model",
    "--plan",
    "--ratio",
    "--multiplier",
    "--k",
    "--threshold",
    "--out",
    "--format",
    "--threads",
    "--paper-protocol",
    "--config",
    "--criterion",
    "--model-file",
];

#[derive(Debug, Parser)]
#[command(
    name = "fraudlab",
    version,
    about = "Resampling, training and evaluation for imbalanced fraud data"
)]
pub struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on this value.
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print class counts of a dataset and of its resampled variants.
    Inspect(InspectArgs),
    /// Resample a dataset and write it as CSV.
    Resample(ResampleArgs),
    /// Train one model and write it as JSON.
    Train(TrainArgs),
    /// Score a saved model on a dataset and write reports.
    Evaluate(EvaluateArgs),
    /// Run one of the experiments: baseline, undersample, smote or hybrid.
    Experiment(ExperimentArgs),
    /// Sweep training fraud ratios for one model and write the curve.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// CSV file with a header row and a final `Class` column.
    #[arg(long, value_name = "PATH", conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,

    /// Generated data instead of a file, as key=value pairs: n_majority,
    /// n_minority, dimensions, class_separation, clusters_per_class, seed.
    #[arg(long, value_name = "SPEC")]
    pub synthetic: Option<String>,
}

impl SourceArgs {
    fn source(&self) -> Result<Option<DataSource>> {
        match (&self.data, &self.synthetic) {
            (Some(path), None) => Ok(Some(DataSource::Csv(path.clone()))),
            (None, Some(spec)) => Ok(Some(DataSource::Synthetic(parse_synthetic(spec)?))),
            (None, None) => Ok(None),
            (Some(_), Some(_)) => Err(Error::Usage(
                "--data and --synthetic cannot be used together".into(),
            )),
        }
    }

    fn load(&self) -> Result<Dataset> {
        let source = self.source()?.unwrap_or_default();
        info!("loading {}", source.describe());
        source.load()
    }
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Fraud ratio of the hybrid projection.
    #[arg(long, default_value_t = 0.02, value_name = "R")]
    pub ratio: f64,
    /// SMOTE multiplier of the hybrid projection.
    #[arg(long, default_value_t = 10.0, value_name = "X")]
    pub multiplier: f64,
    /// Output format: text or csv.
    #[arg(long, default_value = "text", value_name = "FMT")]
    pub format: String,
    /// Write the summary to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Resampling plan: undersample, smote, hybrid or none.
    #[arg(long, value_name = "PLAN")]
    pub plan: String,
    /// Target fraud fraction of the output (default: 0.5 for undersample
    /// and smote, 0.02 for hybrid).
    #[arg(long, value_name = "R")]
    pub ratio: Option<f64>,
    /// Hybrid plan: SMOTE grows the minority to this multiple first.
    #[arg(long, default_value_t = 10.0, value_name = "X")]
    pub multiplier: f64,
    /// Number of nearest minority neighbours SMOTE interpolates towards.
    #[arg(long, default_value_t = 5, value_name = "K")]
    pub k: usize,
    /// Master seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Model as family[:key=value,...]; families: logreg, forest, gbt,
    /// knn, mlp.
    #[arg(long, default_value = "logreg", value_name = "MODEL")]
    pub model: String,
    /// Master seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Decision threshold used for the reported training accuracy.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Output model path (JSON).
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Model file written by `fraudlab train`.
    #[arg(long = "model-file", alias = "model", value_name = "PATH")]
    pub model_file: PathBuf,
    /// Predict fraud when the probability is strictly above this value.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Output directory [default: $FRAUDLAB_OUT, else fraudlab-out].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Report formats, comma separated: json, csv, markdown, svg, or none.
    #[arg(long, value_delimiter = ',', value_name = "FMT")]
    pub format: Vec<String>,
}

/// Flags shared by `experiment` and `sweep`. A flag overrides the config
/// file, which overrides the built-in default.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML config file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Master seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Test share of the train / test split [default: 0.25].
    #[arg(long, value_name = "F")]
    pub split: Option<f64>,
    /// Model as family[:key=value,...]; repeat for several models
    /// [default: all five families].
    #[arg(long = "model", value_name = "MODEL")]
    pub models: Vec<String>,
    /// Fraud ratio grid, comma separated [default: 20 log-spaced values from
    /// 0.01 to 0.5].
    #[arg(long, value_delimiter = ',', value_name = "R")]
    pub ratio: Vec<f64>,
    /// Hybrid SMOTE multiplier of the minority class [default: 10].
    #[arg(long, value_name = "X")]
    pub multiplier: Option<f64>,
    /// SMOTE neighbour count [default: 5].
    #[arg(long)]
    pub k: Option<usize>,
    /// Decision threshold [default: 0.5].
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Ratio selection: max_f1, min_precision_floor=P or knee [default:
    /// max_f1].
    #[arg(long, value_name = "RULE")]
    pub criterion: Option<String>,
    /// Score sweep points on the test split instead of a validation subset
    /// of the training split.
    #[arg(long)]
    pub paper_protocol: bool,
    /// Output directory [default: $FRAUDLAB_OUT, else fraudlab-out].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Report formats, comma separated: json, csv, markdown, svg, or none
    /// [default: all].
    #[arg(long, value_delimiter = ',', value_name = "FMT")]
    pub format: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// baseline, undersample, smote or hybrid.
    pub name: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

fn parse_formats(values: &[String]) -> Result<Option<Vec<Format>>> {
    if values.is_empty() {
        return Ok(None);
    }
    if values.len() == 1 && values[0] == "none" {
        return Ok(Some(Vec::new()));
    }
    values
        .iter()
        .map(|v| v.trim().parse())
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

impl RunArgs {
    /// Config file (or defaults) with command-line overrides applied.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(source) = self.source.source()? {
            cfg.data = source;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(split) = self.split {
            cfg.split = split;
        }
        if !self.models.is_empty() {
            cfg.models = self
                .models
                .iter()
                .map(|m| parse_model(m))
                .collect::<Result<_>>()?;
        }
        if !self.ratio.is_empty() {
            cfg.sweep.ratios = self.ratio.clone();
        }
        if let Some(m) = self.multiplier {
            cfg.sampling.minority_multiplier = m;
        }
        if let Some(k) = self.k {
            cfg.sampling.smote_k = k;
        }
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if let Some(c) = &self.criterion {
            cfg.sweep.criterion = c.parse::<SelectionCriterion>()?;
        }
        if self.paper_protocol {
            cfg.sweep.paper_protocol = true;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(formats) = parse_formats(&self.format)? {
            cfg.formats = formats;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Help text of the tool and of every subcommand.
pub fn help_text() -> String {
    let mut cmd = Cli::command();
    let mut out = cmd.render_long_help().to_string();
    for sub in cmd.get_subcommands_mut() {
        out.push_str(&sub.render_long_help().to_string());
    }
    out
}

fn default_out(out: Option<&PathBuf>) -> PathBuf {
    out.cloned()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn fraction(n: usize, f: usize) -> f64 {
    if n + f == 0 {
        0.0
    } else {
        f as f64 / (n + f) as f64
    }
}

/// Class counts `(non_fraud, fraud)` of a projected set, or why it cannot be built.
type Projection = std::result::Result<(usize, usize), String>;

fn cmd_inspect(args: &InspectArgs) -> Result<String> {
    let ds = args.source.load()?;
    let [n, f] = ds.class_counts();
    let mut rows: Vec<(String, Projection)> = vec![
        ("original".into(), Ok((n, f))),
        ("undersample 1:1".into(), Ok((f, f))),
        ("smote 1:1".into(), Ok((n, n))),
    ];
    let hybrid = hybrid_sizes(f, n, args.ratio, args.multiplier)
        .map(|(m, maj)| (maj, m))
        .map_err(|e| e.to_string());
    rows.push((
        format!("hybrid ratio={} multiplier={}", args.ratio, args.multiplier),
        hybrid,
    ));
    let text = match args.format.as_str() {
        "csv" => {
            let mut s = String::from("set,non_fraud,fraud,total,fraud_fraction,note\n");
            for (name, r) in &rows {
                match r {
                    Ok((n, f)) => {
                        s.push_str(&format!("{name},{n},{f},{},{},\n", n + f, fraction(*n, *f)))
                    }
                    Err(e) => s.push_str(&format!("{name},,,,,\"{}\"\n", e.replace('"', "\"\""))),
                }
            }
            s
        }
        "text" => {
            let mut s = format!(
                "{:<40} {:>10} {:>8} {:>10} {:>10}\n",
                "set", "non-fraud", "fraud", "total", "fraud %"
            );
            for (name, r) in &rows {
                match r {
                    Ok((n, f)) => s.push_str(&format!(
                        "{name:<40} {n:>10} {f:>8} {:>10} {:>9.4}%\n",
                        n + f,
                        100.0 * fraction(*n, *f)
                    )),
                    Err(e) => s.push_str(&format!("{name:<40} infeasible: {e}\n")),
                }
            }
            s
        }
        other => {
            return Err(Error::Usage(format!(
                "inspect --format must be text or csv, not `{other}`"
            )))
        }
    };
    if let Some(path) = &args.out {
        std::fs::write(path, &text).map_err(|e| Error::io(path, e))?;
        return Ok(String::new());
    }
    Ok(text)
}

fn resample_plan(args: &ResampleArgs, ds: &Dataset) -> Result<Option<ResamplePlan>> {
    let [n, f] = ds.class_counts();
    let ratio = |default: f64| -> Result<f64> {
        let r = args.ratio.unwrap_or(default);
        if !(r > 0.0 && r <= 0.5) {
            return Err(Error::Usage(format!("--ratio {r} is not in (0, 0.5]")));
        }
        Ok(r)
    };
    let seed = derive_seed(args.seed, "resample");
    Ok(match args.plan.as_str() {
        "none" => None,
        "undersample" => {
            let r = ratio(0.5)?;
            Some(ResamplePlan::Undersample {
                target_majority: (f as f64 * (1.0 - r) / r).round() as usize,
                seed,
            })
        }
        "smote" => {
            let r = ratio(0.5)?;
            Some(ResamplePlan::Smote {
                target_minority: (n as f64 * r / (1.0 - r)).round() as usize,
                k: args.k,
                seed,
            })
        }
        "hybrid" => Some(ResamplePlan::Hybrid {
            fraud_ratio: ratio(0.02)?,
            minority_multiplier: args.multiplier,
            smote_k: args.k,
            seed,
        }),
        other => {
            return Err(Error::Usage(format!(
                "unknown plan `{other}` (expected undersample, smote, hybrid or none)"
            )))
        }
    })
}

fn cmd_resample(args: &ResampleArgs) -> Result<String> {
    let ds = args.source.load()?;
    let plan = resample_plan(args, &ds)?;
    let out = match &plan {
        Some(p) => p.apply(&ds)?,
        None => ds.clone(),
    };
    save_csv(&out, &args.out)?;
    let [n0, f0] = ds.class_counts();
    let [n1, f1] = out.class_counts();
    Ok(format!(
        "{} -> {}: {} rows ({n0} / {f0}) -> {} rows ({n1} / {f1}), fraud fraction {:.6}\ninput sha256 {}\noutput sha256 {}\n",
        plan.as_ref().map_or("none", ResamplePlan::kind),
        args.out.display(),
        ds.len(),
        out.len(),
        out.fraud_fraction(),
        ds.fingerprint().sha256,
        out.fingerprint().sha256,
    ))
}

fn auto_scale_columns(ds: &Dataset) -> Vec<String> {
    if ds.column_index("Time").is_some() && ds.column_index("Amount").is_some() {
        vec!["Time".into(), "Amount".into()]
    } else {
        ds.feature_names().to_vec()
    }
}

fn cmd_train(args: &TrainArgs, exec: &RayonExecutor) -> Result<String> {
    let params = parse_model(&args.model)?;
    let ds = args.source.load()?;
    let scaler = fit_robust_scaler(&ds, &auto_scale_columns(&ds))?;
    let scaled = scaler.apply(&ds)?;
    let family = params.family();
    let spec = ModelSpec::new(
        params,
        derive_seed(args.seed, &format!("model:{}:0", family.slug())),
    );
    let model = spec.fit(&scaled, exec)?;
    let report = evaluate_with(
        &model,
        &scaled,
        args.threshold,
        EvalContext {
            split: "train".into(),
            seed: args.seed,
            scaler_id: Some(scaler.id()),
            ..EvalContext::default()
        },
        exec,
    )?;
    save_model(&ModelDocument::new(model, Some(scaler)), &args.out)?;
    Ok(format!(
        "trained {} on {} rows -> {}\ntraining accuracy {:.6}\n",
        family.display_name(),
        ds.len(),
        args.out.display(),
        report.class_1.accuracy
    ))
}

fn cmd_evaluate(args: &EvaluateArgs, exec: &RayonExecutor) -> Result<String> {
    let formats: BTreeSet<Format> = parse_formats(&args.format)?
        .unwrap_or_else(|| Format::ALL.to_vec())
        .into_iter()
        .collect();
    let out = default_out(args.out.as_ref());
    prepare_output(&out)?;
    let doc = load_model(&args.model_file)?;
    let ds = args.source.load()?;
    let scaled = match &doc.scaler {
        Some(s) => s.apply(&ds)?,
        None => ds,
    };
    let ctx = EvalContext {
        split: "evaluate".into(),
        seed: doc.model.spec.seed,
        scaler_id: doc.scaler.as_ref().map(|s| s.id()),
        ..EvalContext::default()
    };
    let report = evaluate_with(&doc.model, &scaled, args.threshold, ctx, exec)?;
    let family = doc.model.family();
    let name = family.display_name();
    let mut em = Emitter::new(&out);
    let stem = format!("reports/evaluate/{}", family.slug());
    for f in &formats {
        let body = match f {
            Format::Json => to_json(&report)?,
            Format::Csv => crate::report::report_csv(name, &report),
            Format::Markdown => crate::report::report_markdown(name, &report),
            Format::Svg => {
                crate::report::metrics_svg(&format!("{name} (class 1)"), &[(name, &report.class_1)])
            }
        };
        em.write(&format!("{stem}.{}", f.extension()), body.as_bytes())?;
    }
    em.finish(None, None, None)?;
    Ok(markdown_table([(name, &report.class_1)]))
}

fn cmd_experiment(args: &ExperimentArgs, exec: &RayonExecutor) -> Result<String> {
    let kind: ExperimentKind = args.name.parse()?;
    let cfg = args.run.resolve()?;
    let out = cfg.out_dir();
    prepare_output(&out)?;
    let result = experiments::run(kind, &cfg, exec)?;
    let formats: BTreeSet<Format> = cfg.formats.iter().copied().collect();
    let manifest = crate::report::emit_reports(&result, &out, &formats)?;
    let mut text = String::new();
    for group in result.groups() {
        text.push_str(&format!("{group} (class 1)\n"));
        text.push_str(&markdown_table(
            result
                .group(group)
                .map(|e| (e.model.display_name(), &e.report.class_1)),
        ));
        text.push('\n');
    }
    for s in &result.sweeps {
        text.push_str(&format!(
            "{}: selected fraud ratio {}\n",
            s.model.display_name(),
            s.selected_ratio
        ));
    }
    text.push_str(&format!(
        "{} artifacts written to {}\n",
        manifest.artifacts.len(),
        out.display()
    ));
    Ok(text)
}

fn cmd_sweep(args: &SweepArgs, exec: &RayonExecutor) -> Result<String> {
    let cfg = args.run.resolve()?;
    let out = cfg.out_dir();
    prepare_output(&out)?;
    let formats: BTreeSet<Format> = cfg.formats.iter().copied().collect();
    let mut em = Emitter::new(&out);
    let mut text = String::new();
    for spec in cfg.model_specs() {
        let record = experiments::run_sweep(&cfg, &spec, exec)?;
        emit_sweep(&mut em, &record, &formats)?;
        text.push_str(&format!(
            "{}: selected fraud ratio {} (scored on {})\n",
            record.model.display_name(),
            record.selected_ratio,
            record.scored_on
        ));
    }
    em.finish(None, Some(cfg.clone()), None)?;
    Ok(text)
}

fn dispatch(cli: &Cli) -> Result<String> {
    let exec = RayonExecutor::new(cli.threads)?;
    match &cli.command {
        Command::Inspect(a) => cmd_inspect(a),
        Command::Resample(a) => cmd_resample(a),
        Command::Train(a) => cmd_train(a, &exec),
        Command::Evaluate(a) => cmd_evaluate(a, &exec),
        Command::Experiment(a) => cmd_experiment(a, &exec),
        Command::Sweep(a) => cmd_sweep(a, &exec),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
        }
    };
    match dispatch(&cli) {
        Ok(text) => {
            print!("{text}");
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

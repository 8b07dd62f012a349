//! The four canned experiments.
//!
//! Every experiment starts from the same stratified train / test split of
//! the loaded data, fits the robust scaler on training rows only, and checks
//! the leakage guards in [`guards`] before any model is trained.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use fraudlab_core::dataset::{fit_robust_scaler, random_split, stratified_split};
use fraudlab_core::metrics::{evaluate_with, EvalContext};
use fraudlab_core::models::{Family, ModelSpec};
use fraudlab_core::resampling::{
    ratio_sweep, select_ratio, smote, RatioSweepResult, SweepSettings,
};
use fraudlab_core::rng::derive_seed;
use fraudlab_core::{Dataset, EvalReport, Executor, ResamplePlan, RowId, ScalerParams};
use log::info;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Context, Error, Result};

pub const SPLIT_ORIGINAL_TEST: &str = "original-test";
pub const SPLIT_BALANCED_TEST: &str = "balanced-test";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Baseline,
    Undersample,
    Smote,
    Hybrid,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::Baseline,
        ExperimentKind::Undersample,
        ExperimentKind::Smote,
        ExperimentKind::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Baseline => "baseline",
            ExperimentKind::Undersample => "undersample",
            ExperimentKind::Smote => "smote",
            ExperimentKind::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown experiment `{s}` (expected baseline, undersample, smote or hybrid)"
                ))
            })
    }
}

/// A deliberate defect injected into a run to prove the guards fire.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Copies one training row into the test split.
    LeakTrainRow,
    /// Fits the scaler on the test split.
    ScalerOnTest,
    /// Adds a SMOTE row built from test rows to the original test split.
    SyntheticInTest,
}

/// Class counts of one dataset used in a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub set: String,
    pub non_fraud: usize,
    pub fraud: usize,
}

impl ClassCounts {
    fn of(set: &str, ds: &Dataset) -> Self {
        let [non_fraud, fraud] = ds.class_counts();
        ClassCounts {
            set: set.to_string(),
            non_fraud,
            fraud,
        }
    }
}

/// One model scored on one evaluation set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Report group, used as the directory name under `reports/`.
    pub group: String,
    pub model: Family,
    pub report: EvalReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub model: Family,
    /// `validation` or `original-test`.
    pub scored_on: String,
    pub selected_ratio: f64,
    pub sweep: RatioSweepResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub class_counts: Vec<ClassCounts>,
    pub evaluations: Vec<Evaluation>,
    pub sweeps: Vec<SweepRecord>,
    /// Wall-clock durations; never part of any hashed artifact.
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

impl ExperimentResult {
    pub fn group(&self, group: &str) -> impl Iterator<Item = &Evaluation> {
        let group = group.to_string();
        self.evaluations.iter().filter(move |e| e.group == group)
    }

    pub fn find(&self, group: &str, model: Family) -> Option<&EvalReport> {
        self.evaluations
            .iter()
            .find(|e| e.group == group && e.model == model)
            .map(|e| &e.report)
    }

    /// Report groups in the order they were produced.
    pub fn groups(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.evaluations {
            if !out.contains(&e.group.as_str()) {
                out.push(&e.group);
            }
        }
        out
    }
}

/// Leakage checks run before training.
pub mod guards {
    use super::*;

    /// No original row may feed both the training and the evaluation set,
    /// directly or as the base / neighbour of a synthetic row.
    pub fn disjoint(train: &Dataset, eval: &Dataset, what: &str) -> Result<()> {
        let train_ids = train.source_ids();
        let shared: Vec<RowId> = eval
            .source_ids()
            .intersection(&train_ids)
            .copied()
            .take(3)
            .collect();
        if !shared.is_empty() {
            let ids: Vec<String> = shared.iter().map(RowId::to_string).collect();
            return Err(fraudlab_core::Error::Leakage(format!(
                "{what}: rows {} are used for training and evaluation",
                ids.join(", ")
            ))
            .into());
        }
        Ok(())
    }

    /// An original-distribution test set holds no synthetic rows.
    pub fn original(eval: &Dataset, what: &str) -> Result<()> {
        if let Some(id) = eval.row_ids().iter().find(|id| id.is_synthetic()) {
            return Err(fraudlab_core::Error::Leakage(format!(
                "{what}: synthetic row {id} in an original test set"
            ))
            .into());
        }
        Ok(())
    }

    /// The scaler was fitted on exactly the (unresampled) training rows, and
    /// every row of the resampled training set derives from them.
    pub fn scaler(
        scaler: Option<&ScalerParams>,
        train: &Dataset,
        resampled: &Dataset,
    ) -> Result<()> {
        if let Some(s) = scaler {
            if s.fitted_on != train.id_set_hash() {
                return Err(fraudlab_core::Error::Leakage(format!(
                    "scaler {} was not fitted on the training rows",
                    s.id()
                ))
                .into());
            }
        }
        let train_ids: BTreeSet<RowId> = train.row_ids().iter().copied().collect();
        if let Some(id) = resampled
            .source_ids()
            .iter()
            .find(|id| !train_ids.contains(id))
        {
            return Err(fraudlab_core::Error::Leakage(format!(
                "resampled training row {id} is not a training row"
            ))
            .into());
        }
        Ok(())
    }
}

/// Options that do not belong in the config file.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub fault: Fault,
}

fn timed<T>(timings: &mut Vec<Timing>, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    timings.push(Timing {
        stage: stage.to_string(),
        seconds: start.elapsed().as_secs_f64(),
    });
    out
}

fn scale_columns(cfg: &ExperimentConfig, ds: &Dataset) -> Vec<String> {
    match &cfg.scale_columns {
        Some(cols) => cols.clone(),
        None if ds.column_index("Time").is_some() && ds.column_index("Amount").is_some() => {
            vec!["Time".into(), "Amount".into()]
        }
        None => ds.feature_names().to_vec(),
    }
}

/// Fits the scaler on `fit_on` and applies it to every set in `sets`.
fn scale(
    cfg: &ExperimentConfig,
    fit_on: &Dataset,
    sets: &mut [&mut Dataset],
) -> Result<Option<ScalerParams>> {
    let cols = scale_columns(cfg, fit_on);
    if cols.is_empty() {
        return Ok(None);
    }
    let params = fit_robust_scaler(fit_on, &cols)?;
    for ds in sets.iter_mut() {
        **ds = params.apply(ds)?;
    }
    Ok(Some(params))
}

struct Prepared {
    train: Dataset,
    test: Dataset,
    scaler: Option<ScalerParams>,
}

/// Stratified split followed by train-only scaling.
fn prepare(cfg: &ExperimentConfig, full: &Dataset, fault: Fault) -> Result<Prepared> {
    let (mut train, mut test) = stratified_split(full, cfg.split, derive_seed(cfg.seed, "split"))
        .context(|| "stratified split".into())?;
    if fault == Fault::LeakTrainRow {
        test = test.concat(&train.select(&[0]))?;
    }
    let scaler = if fault == Fault::ScalerOnTest {
        let fit_on = test.clone();
        scale(cfg, &fit_on, &mut [&mut train, &mut test])?
    } else {
        let fit_on = train.clone();
        scale(cfg, &fit_on, &mut [&mut train, &mut test])?
    };
    if fault == Fault::SyntheticInTest {
        let [_, frauds] = test.class_counts();
        let k = cfg.sampling.smote_k.min(frauds.saturating_sub(1)).max(1);
        test = smote(&test, frauds + 1, k, 0)?;
    }
    Ok(Prepared {
        train,
        test,
        scaler,
    })
}

fn context(
    cfg: &ExperimentConfig,
    plan: Option<&ResamplePlan>,
    split: &str,
    scaler: Option<&ScalerParams>,
) -> EvalContext {
    EvalContext {
        plan: plan.cloned(),
        split: split.to_string(),
        seed: cfg.seed,
        scaler_id: scaler.map(ScalerParams::id),
    }
}

/// Training rows plus where they came from.
#[derive(Clone, Copy)]
struct TrainingSet<'a> {
    data: &'a Dataset,
    plan: Option<&'a ResamplePlan>,
    scaler: Option<&'a ScalerParams>,
}

/// Fits every model on `train` and scores it on each `(group, split, set)`.
fn fit_and_score<E: Executor>(
    cfg: &ExperimentConfig,
    specs: &[ModelSpec],
    train: TrainingSet<'_>,
    evals: &[(&str, &str, &Dataset)],
    exec: &E,
    timings: &mut Vec<Timing>,
) -> Result<Vec<Evaluation>> {
    let TrainingSet {
        data: train,
        plan,
        scaler,
    } = train;
    let results = exec.map(specs.len(), |i| {
        let spec = &specs[i];
        let start = Instant::now();
        let model = spec
            .fit(train, exec)
            .context(|| format!("training {}", spec.family()))?;
        let fit_seconds = start.elapsed().as_secs_f64();
        let mut out = Vec::with_capacity(evals.len());
        for &(group, split, ds) in evals {
            let report = evaluate_with(
                &model,
                ds,
                cfg.threshold,
                context(cfg, plan, split, scaler),
                exec,
            )
            .context(|| format!("evaluating {} on {split}", spec.family()))?;
            out.push(Evaluation {
                group: group.to_string(),
                model: spec.family(),
                report,
            });
        }
        Ok::<_, Error>((out, fit_seconds))
    });
    let mut evaluations = Vec::new();
    let group = evals.first().map_or("", |e| e.0);
    for (spec, r) in specs.iter().zip(results) {
        let (evs, secs) = r?;
        info!("{group}: trained {} in {secs:.2}s", spec.family());
        timings.push(Timing {
            stage: format!("{group}/{}", spec.family()),
            seconds: secs,
        });
        evaluations.extend(evs);
    }
    // Group-major order: all models of the first evaluation set, then the next.
    evaluations.sort_by_key(|e| evals.iter().position(|x| x.0 == e.group));
    Ok(evaluations)
}

pub fn run<E: Executor>(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    exec: &E,
) -> Result<ExperimentResult> {
    run_with(kind, cfg, exec, RunOptions::default())
}

pub fn run_with<E: Executor>(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    exec: &E,
    opts: RunOptions,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut timings = Vec::new();
    let full = timed(&mut timings, "load", || cfg.data.load())?;
    info!(
        "{kind}: loaded {} rows ({} fraud) from {}",
        full.len(),
        full.fraud_count(),
        cfg.data.describe()
    );
    let mut result = match kind {
        ExperimentKind::Baseline => run_baseline(cfg, &full, exec, opts, &mut timings),
        ExperimentKind::Undersample => run_undersampling(cfg, &full, exec, opts, &mut timings),
        ExperimentKind::Smote => run_smote(cfg, &full, exec, opts, &mut timings),
        ExperimentKind::Hybrid => run_hybrid(cfg, &full, exec, opts, &mut timings),
    }
    .context(|| format!("experiment {kind}"))?;
    verify_provenance(&result)?;
    result.timings = timings;
    Ok(result)
}

fn new_result(kind: ExperimentKind, cfg: &ExperimentConfig) -> ExperimentResult {
    ExperimentResult {
        experiment: kind,
        config: cfg.clone(),
        class_counts: Vec::new(),
        evaluations: Vec::new(),
        sweeps: Vec::new(),
        timings: Vec::new(),
    }
}

/// All models on the unmodified training split, scored on the original test
/// split.
pub fn run_baseline<E: Executor>(
    cfg: &ExperimentConfig,
    full: &Dataset,
    exec: &E,
    opts: RunOptions,
    timings: &mut Vec<Timing>,
) -> Result<ExperimentResult> {
    let p = prepare(cfg, full, opts.fault)?;
    guards::disjoint(&p.train, &p.test, "baseline")?;
    guards::original(&p.test, "baseline")?;
    guards::scaler(p.scaler.as_ref(), &p.train, &p.train)?;
    let mut result = new_result(ExperimentKind::Baseline, cfg);
    result.class_counts = vec![
        ClassCounts::of("train", &p.train),
        ClassCounts::of("test", &p.test),
    ];
    result.evaluations = fit_and_score(
        cfg,
        &cfg.model_specs(),
        TrainingSet {
            data: &p.train,
            plan: None,
            scaler: p.scaler.as_ref(),
        },
        &[("baseline", SPLIT_ORIGINAL_TEST, &p.test)],
        exec,
        timings,
    )?;
    Ok(result)
}

/// Undersamples the whole dataset to 1:1, splits the pool at random and
/// scores each model on the pool's test split and on an imbalanced test set.
///
/// The imbalanced set is the pool's test split plus every majority row of
/// the shared stratified test split that did not enter the pool, so it
/// contains no training row and keeps roughly the original class ratio.
pub fn run_undersampling<E: Executor>(
    cfg: &ExperimentConfig,
    full: &Dataset,
    exec: &E,
    opts: RunOptions,
    timings: &mut Vec<Timing>,
) -> Result<ExperimentResult> {
    let (_, master_test) = stratified_split(full, cfg.split, derive_seed(cfg.seed, "split"))
        .context(|| "stratified split".into())?;
    let plan = ResamplePlan::Undersample {
        target_majority: full.fraud_count(),
        seed: derive_seed(cfg.seed, "undersample-pool"),
    };
    let pool = plan.apply(full).context(|| "undersampling".into())?;
    let (mut train, mut pool_test) =
        random_split(&pool, cfg.split, derive_seed(cfg.seed, "pool-split"))
            .context(|| "pool split".into())?;

    let pool_ids: BTreeSet<RowId> = pool.row_ids().iter().copied().collect();
    let mut keep: BTreeSet<RowId> = pool_test.row_ids().iter().copied().collect();
    keep.extend(
        (0..master_test.len())
            .filter(|&i| master_test.label(i) == 0 && !pool_ids.contains(&master_test.row_id(i)))
            .map(|i| master_test.row_id(i)),
    );
    let rows: Vec<usize> = (0..full.len())
        .filter(|&i| keep.contains(&full.row_id(i)))
        .collect();
    let mut imbalanced = full.select(&rows);
    if opts.fault == Fault::LeakTrainRow {
        imbalanced = imbalanced.concat(&train.select(&[0]))?;
    }

    let fit_on = if opts.fault == Fault::ScalerOnTest {
        imbalanced.clone()
    } else {
        train.clone()
    };
    let scaler = scale(
        cfg,
        &fit_on,
        &mut [&mut train, &mut pool_test, &mut imbalanced],
    )?;
    if opts.fault == Fault::SyntheticInTest {
        let frauds = imbalanced.fraud_count();
        imbalanced = smote(&imbalanced, frauds + 1, 1, 0)?;
    }

    guards::disjoint(&train, &pool_test, "undersample balanced test")?;
    guards::disjoint(&train, &imbalanced, "undersample imbalanced test")?;
    guards::original(&imbalanced, "undersample imbalanced test")?;
    guards::scaler(scaler.as_ref(), &train, &train)?;

    let mut result = new_result(ExperimentKind::Undersample, cfg);
    result.class_counts = vec![
        ClassCounts::of("original", full),
        ClassCounts::of("undersampled pool", &pool),
        ClassCounts::of("pool train", &train),
        ClassCounts::of("pool test", &pool_test),
        ClassCounts::of("imbalanced test", &imbalanced),
    ];
    result.evaluations = fit_and_score(
        cfg,
        &cfg.model_specs(),
        TrainingSet {
            data: &train,
            plan: Some(&plan),
            scaler: scaler.as_ref(),
        },
        &[
            ("undersample-balanced", SPLIT_BALANCED_TEST, &pool_test),
            ("undersample-original", SPLIT_ORIGINAL_TEST, &imbalanced),
        ],
        exec,
        timings,
    )?;
    Ok(result)
}

/// SMOTE on the training split to 1:1. Scored on the original test split
/// and on a balanced test set made by SMOTE on the test split alone.
pub fn run_smote<E: Executor>(
    cfg: &ExperimentConfig,
    full: &Dataset,
    exec: &E,
    opts: RunOptions,
    timings: &mut Vec<Timing>,
) -> Result<ExperimentResult> {
    let p = prepare(cfg, full, opts.fault)?;
    let plan = ResamplePlan::Smote {
        target_minority: p.train.class_counts()[0],
        k: cfg.sampling.smote_k,
        seed: derive_seed(cfg.seed, "smote-train"),
    };
    let train = timed(timings, "smote/resample", || {
        plan.apply(&p.train)
            .context(|| "SMOTE on the training split".into())
    })?;
    let [test_majority, test_minority] = p.test.class_counts();
    let test_k = cfg.sampling.smote_k.min(test_minority.saturating_sub(1));
    let balanced_test = smote(
        &p.test,
        test_majority,
        test_k,
        derive_seed(cfg.seed, "smote-test"),
    )
    .context(|| "SMOTE on the test split".into())?;

    guards::disjoint(&train, &p.test, "smote original test")?;
    guards::disjoint(&train, &balanced_test, "smote balanced test")?;
    guards::original(&p.test, "smote original test")?;
    guards::scaler(p.scaler.as_ref(), &p.train, &train)?;

    let mut result = new_result(ExperimentKind::Smote, cfg);
    result.class_counts = vec![
        ClassCounts::of("train", &p.train),
        ClassCounts::of("SMOTE train", &train),
        ClassCounts::of("test", &p.test),
        ClassCounts::of("SMOTE test", &balanced_test),
    ];
    result.evaluations = fit_and_score(
        cfg,
        &cfg.model_specs(),
        TrainingSet {
            data: &train,
            plan: Some(&plan),
            scaler: p.scaler.as_ref(),
        },
        &[
            ("smote-original", SPLIT_ORIGINAL_TEST, &p.test),
            ("smote-balanced", SPLIT_BALANCED_TEST, &balanced_test),
        ],
        exec,
        timings,
    )?;
    Ok(result)
}

/// Baseline models, then per model a fraud-ratio sweep, ratio selection and
/// a final hybrid-resampled fit scored on the original test split.
pub fn run_hybrid<E: Executor>(
    cfg: &ExperimentConfig,
    full: &Dataset,
    exec: &E,
    opts: RunOptions,
    timings: &mut Vec<Timing>,
) -> Result<ExperimentResult> {
    let p = prepare(cfg, full, opts.fault)?;
    guards::disjoint(&p.train, &p.test, "hybrid")?;
    guards::original(&p.test, "hybrid")?;
    guards::scaler(p.scaler.as_ref(), &p.train, &p.train)?;
    let specs = cfg.model_specs();

    let mut result = new_result(ExperimentKind::Hybrid, cfg);
    result.class_counts = vec![
        ClassCounts::of("train", &p.train),
        ClassCounts::of("test", &p.test),
    ];
    result.evaluations = fit_and_score(
        cfg,
        &specs,
        TrainingSet {
            data: &p.train,
            plan: None,
            scaler: p.scaler.as_ref(),
        },
        &[("hybrid-baseline", SPLIT_ORIGINAL_TEST, &p.test)],
        exec,
        timings,
    )?;

    let data = sweep_data(cfg, &p)?;
    let settings = sweep_settings(cfg);

    let outcomes = exec.map(specs.len(), |i| {
        let spec = &specs[i];
        let start = Instant::now();
        let record = sweep_model(cfg, spec, &data, &settings, exec)?;
        let ratio = record.selected_ratio;
        let plan = settings.plan_for(ratio);
        let train = plan
            .apply(&p.train)
            .context(|| format!("hybrid resampling at ratio {ratio} for {}", spec.family()))?;
        guards::scaler(p.scaler.as_ref(), &p.train, &train)?;
        guards::disjoint(&train, &p.test, "hybrid final")?;
        let model = spec.fit(&train, exec)?;
        let report = evaluate_with(
            &model,
            &p.test,
            cfg.threshold,
            context(cfg, Some(&plan), SPLIT_ORIGINAL_TEST, p.scaler.as_ref()),
            exec,
        )?;
        info!("hybrid: {} selected ratio {ratio:.4}", spec.family());
        Ok::<_, Error>((
            record,
            Evaluation {
                group: "hybrid".into(),
                model: spec.family(),
                report,
            },
            start.elapsed().as_secs_f64(),
        ))
    });
    for (spec, outcome) in specs.iter().zip(outcomes) {
        let (record, evaluation, secs) = outcome?;
        timings.push(Timing {
            stage: format!("hybrid/{}", spec.family()),
            seconds: secs,
        });
        result.sweeps.push(record);
        result.evaluations.push(evaluation);
    }
    Ok(result)
}

/// Rows the sweep trains on and rows it scores on.
pub struct SweepData {
    pub train: Dataset,
    pub eval: Dataset,
    /// `validation`, or `original-test` with `--paper-protocol`.
    pub scored_on: &'static str,
}

fn sweep_data(cfg: &ExperimentConfig, p: &Prepared) -> Result<SweepData> {
    if cfg.sweep.paper_protocol {
        return Ok(SweepData {
            train: p.train.clone(),
            eval: p.test.clone(),
            scored_on: SPLIT_ORIGINAL_TEST,
        });
    }
    let (train, eval) = stratified_split(
        &p.train,
        cfg.sweep.validation_fraction,
        derive_seed(cfg.seed, "sweep-validation"),
    )
    .context(|| "validation split".into())?;
    Ok(SweepData {
        train,
        eval,
        scored_on: "validation",
    })
}

fn sweep_settings(cfg: &ExperimentConfig) -> SweepSettings {
    SweepSettings {
        minority_multiplier: cfg.sampling.minority_multiplier,
        smote_k: cfg.sampling.smote_k,
        threshold: cfg.threshold,
        seed: derive_seed(cfg.seed, "sweep"),
    }
}

/// Sweeps the configured ratio grid for one model and selects a ratio.
fn sweep_model<E: Executor>(
    cfg: &ExperimentConfig,
    spec: &ModelSpec,
    data: &SweepData,
    settings: &SweepSettings,
    exec: &E,
) -> Result<SweepRecord> {
    let sweep = ratio_sweep(
        &data.train,
        &data.eval,
        &cfg.sweep.ratios,
        spec,
        settings,
        exec,
    )
    .context(|| format!("sweeping {}", spec.family()))?;
    let selected_ratio = select_ratio(&sweep, cfg.sweep.criterion)
        .context(|| format!("selecting a ratio for {}", spec.family()))?;
    Ok(SweepRecord {
        model: spec.family(),
        scored_on: data.scored_on.to_string(),
        selected_ratio,
        sweep,
    })
}

/// The sweep of the hybrid experiment for a single model, without the final
/// fit.
pub fn run_sweep<E: Executor>(
    cfg: &ExperimentConfig,
    spec: &ModelSpec,
    exec: &E,
) -> Result<SweepRecord> {
    cfg.validate()?;
    let full = cfg.data.load()?;
    let p = prepare(cfg, &full, Fault::None)?;
    guards::disjoint(&p.train, &p.test, "sweep")?;
    guards::scaler(p.scaler.as_ref(), &p.train, &p.train)?;
    let data = sweep_data(cfg, &p)?;
    sweep_model(cfg, spec, &data, &sweep_settings(cfg), exec)
}

/// Every report names a model spec from the config, the master seed and, for
/// resampled runs, the plan that produced its training data.
pub fn verify_provenance(result: &ExperimentResult) -> Result<()> {
    let specs = result.config.model_specs();
    for e in &result.evaluations {
        let prov = &e.report.provenance;
        let ok = specs.contains(&prov.model)
            && prov.seed == result.config.seed
            && prov.model.family() == e.model;
        let needs_plan = !matches!(e.group.as_str(), "baseline" | "hybrid-baseline");
        if !ok || needs_plan != prov.plan.is_some() {
            return Err(Error::Internal(format!(
                "report {}/{} does not match the configuration it claims to come from",
                e.group, e.model
            )));
        }
    }
    Ok(())
}

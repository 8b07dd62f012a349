//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 42
//! split = 0.25
//! threshold = 0.5
//! out = "runs/demo"
//! formats = ["json", "csv", "markdown", "svg"]
//!
//! [data]
//! csv = "creditcard.csv"
//! # or: [data.synthetic] n_majority = 19900, n_minority = 100, dimensions = 8, class_separation = 2.5
//!
//! [[models]]
//! family = "forest"
//! n_trees = 100
//!
//! [sampling]
//! smote_k = 5
//! minority_multiplier = 10.0
//!
//! [sweep]
//! ratios = [0.01, 0.02, 0.05]
//! criterion = "max_f1"
//! paper_protocol = false
//! validation_fraction = 0.2
//! ```
//!
//! Every key is optional; missing keys take the defaults of
//! [`ExperimentConfig::default`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fraudlab_core::dataset::generate_synthetic;
use fraudlab_core::models::{Family, ModelParams, ModelSpec};
use fraudlab_core::resampling::{
    default_ratio_grid, SelectionCriterion, DEFAULT_MINORITY_MULTIPLIER, DEFAULT_SMOTE_K,
};
use fraudlab_core::rng::derive_seed;
use fraudlab_core::{Dataset, SyntheticSpec};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::load_csv;

/// Output directory used when neither the config nor the command line
/// names one and `FRAUDLAB_OUT` is unset.
pub const DEFAULT_OUT: &str = "fraudlab-out";
pub const OUT_ENV: &str = "FRAUDLAB_OUT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Csv(PathBuf),
    Synthetic(SyntheticSpec),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SyntheticSpec::new(19_900, 100, 8, 2.5, 7))
    }
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Csv(path) => load_csv(path),
            DataSource::Synthetic(spec) => Ok(generate_synthetic(spec)?),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DataSource::Csv(path) => path.display().to_string(),
            DataSource::Synthetic(spec) => format!(
                "synthetic n_majority={} n_minority={} dimensions={} class_separation={} clusters_per_class={} seed={}",
                spec.n_majority, spec.n_minority, spec.dimensions, spec.class_separation, spec.clusters_per_class, spec.seed
            ),
        }
    }
}

/// Parses `key=value,...` into a synthetic spec, starting from the default
/// generator settings.
pub fn parse_synthetic(text: &str) -> Result<SyntheticSpec> {
    let DataSource::Synthetic(mut spec) = DataSource::default() else {
        unreachable!("default source is synthetic")
    };
    for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            Error::Usage(format!("--synthetic: expected key=value, found `{pair}`"))
        })?;
        let bad = || Error::Usage(format!("--synthetic: bad value `{value}` for `{key}`"));
        match key.trim() {
            "n_majority" => spec.n_majority = value.parse().map_err(|_| bad())?,
            "n_minority" => spec.n_minority = value.parse().map_err(|_| bad())?,
            "dimensions" => spec.dimensions = value.parse().map_err(|_| bad())?,
            "class_separation" => spec.class_separation = value.parse().map_err(|_| bad())?,
            "clusters_per_class" => spec.clusters_per_class = value.parse().map_err(|_| bad())?,
            "seed" => spec.seed = value.parse().map_err(|_| bad())?,
            other => return Err(Error::Usage(format!("--synthetic: unknown key `{other}`"))),
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// Parses `family[:key=value,...]` into model parameters.
pub fn parse_model(text: &str) -> Result<ModelParams> {
    let (family, rest) = text.split_once(':').unwrap_or((text, ""));
    let family: Family = family.trim().parse()?;
    let mut table = toml::Table::new();
    table.insert("family".into(), toml::Value::String(family.slug().into()));
    for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("--model: expected key=value, found `{pair}`")))?;
        // Reuse the TOML value grammar for numbers, booleans and arrays.
        let value: toml::Value = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .ok_or_else(|| Error::Usage(format!("--model: bad value `{value}` for `{key}`")))?;
        table.insert(key.trim().to_string(), value);
    }
    let params: ModelParams = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Usage(format!("--model {text}: {}", e.message())))?;
    ModelSpec::new(params.clone(), 0).validate()?;
    Ok(params)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Markdown,
    Svg,
}

impl Format {
    pub const ALL: [Format; 4] = [Format::Json, Format::Csv, Format::Markdown, Format::Svg];

    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Markdown => "md",
            Format::Svg => "svg",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Markdown => "markdown",
            Format::Svg => "svg",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "svg" => Ok(Format::Svg),
            _ => Err(Error::Usage(format!(
                "unknown format `{s}` (expected json, csv, markdown or svg)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub smote_k: usize,
    pub minority_multiplier: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            smote_k: DEFAULT_SMOTE_K,
            minority_multiplier: DEFAULT_MINORITY_MULTIPLIER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub ratios: Vec<f64>,
    pub criterion: SelectionCriterion,
    /// Score sweep points on the test split instead of a validation
    /// subset of the training split.
    pub paper_protocol: bool,
    /// Share of the training split held out for scoring sweep points.
    pub validation_fraction: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            ratios: default_ratio_grid(),
            criterion: SelectionCriterion::MaxF1,
            paper_protocol: false,
            validation_fraction: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Test share of the train / test split.
    pub split: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
    /// Columns to robust-scale. Unset: `Time` and `Amount` when the data has
    /// them, otherwise every feature. Empty: no scaling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_columns: Option<Vec<String>>,
    pub data: DataSource,
    pub models: Vec<ModelParams>,
    pub sampling: SamplingConfig,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            split: 0.25,
            threshold: 0.5,
            out: None,
            formats: Format::ALL.to_vec(),
            scale_columns: None,
            data: DataSource::default(),
            models: Family::ALL
                .into_iter()
                .map(ModelParams::default_for)
                .collect(),
            sampling: SamplingConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Usage(format!("config: {}", e.message())))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(format!("cannot serialize config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(Error::Usage(m));
        if !(self.split > 0.0 && self.split < 1.0) {
            return usage(format!("split {} is not in (0, 1)", self.split));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return usage(format!("threshold {} is not in [0, 1]", self.threshold));
        }
        if self.models.is_empty() {
            return usage("no models configured".into());
        }
        for (i, params) in self.models.iter().enumerate() {
            ModelSpec::new(params.clone(), 0)
                .validate()
                .map_err(|e| Error::Usage(format!("models[{i}]: {e}")))?;
        }
        if self.sampling.smote_k == 0 {
            return usage("sampling.smote_k must be at least 1".into());
        }
        if !(self.sampling.minority_multiplier >= 1.0
            && self.sampling.minority_multiplier.is_finite())
        {
            return usage(format!(
                "sampling.minority_multiplier {} must be >= 1",
                self.sampling.minority_multiplier
            ));
        }
        if self.sweep.ratios.is_empty() {
            return usage("sweep.ratios is empty".into());
        }
        if let Some(r) = self.sweep.ratios.iter().find(|&&r| !(r > 0.0 && r <= 0.5)) {
            return usage(format!("sweep ratio {r} is not in (0, 0.5]"));
        }
        if !(self.sweep.validation_fraction > 0.0 && self.sweep.validation_fraction < 1.0) {
            return usage(format!(
                "sweep.validation_fraction {} is not in (0, 1)",
                self.sweep.validation_fraction
            ));
        }
        if let DataSource::Synthetic(spec) = &self.data {
            spec.validate()
                .map_err(|e| Error::Usage(format!("data.synthetic: {e}")))?;
        }
        if let DataSource::Csv(path) = &self.data {
            if !path.is_file() {
                return Err(Error::Data {
                    path: path.clone(),
                    message: "no such file".into(),
                });
            }
        }
        Ok(())
    }

    /// Output directory: config value, then `FRAUDLAB_OUT`, then
    /// [`DEFAULT_OUT`].
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    /// Model specs with seeds derived from the master seed and each model's
    /// family and position among models of that family, so adding a model
    /// leaves the others' seeds unchanged.
    pub fn model_specs(&self) -> Vec<ModelSpec> {
        let mut seen = std::collections::BTreeMap::<Family, usize>::new();
        self.models
            .iter()
            .map(|params| {
                let family = params.family();
                let n = seen.entry(family).or_insert(0);
                let label = format!("model:{}:{}", family.slug(), n);
                *n += 1;
                ModelSpec::new(params.clone(), derive_seed(self.seed, &label))
            })
            .collect()
    }
}

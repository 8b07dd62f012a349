//! Five binary classifiers behind one contract: fit on a [`Dataset`], then
//! return `P(y = 1 | x)` for a feature vector.
//!
//! | family   | model                                        |
//! |----------|----------------------------------------------|
//! | `logreg` | logistic regression, full-batch gradient descent |
//! | `forest` | bagged CART trees (Gini), soft vote          |
//! | `gbt`    | second-order gradient-boosted trees, logistic loss |
//! | `knn`    | brute-force Euclidean k-nearest neighbours   |
//! | `mlp`    | ReLU multilayer perceptron trained with Adam |

pub mod forest;
pub mod gbt;
pub mod knn;
pub mod logreg;
pub mod mlp;
pub mod tree;

pub use forest::{ForestModel, ForestParams};
pub use gbt::{GbtModel, GbtParams};
pub use knn::{KnnModel, KnnParams};
pub use logreg::{LogRegModel, LogRegParams};
pub use mlp::{MlpModel, MlpParams};
pub use tree::TreeNode;

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Executor;

/// Rows scored per executor task when predicting a whole dataset.
const PREDICT_CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Logreg,
    Forest,
    Gbt,
    Knn,
    Mlp,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Logreg,
        Family::Forest,
        Family::Gbt,
        Family::Knn,
        Family::Mlp,
    ];

    /// Short identifier used in file names and on the command line.
    pub fn slug(self) -> &'static str {
        match self {
            Family::Logreg => "logreg",
            Family::Forest => "forest",
            Family::Gbt => "gbt",
            Family::Knn => "knn",
            Family::Mlp => "mlp",
        }
    }

    /// Human-readable name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Family::Logreg => "Logistic Regression",
            Family::Forest => "Random Forest",
            Family::Gbt => "Gradient Boosting",
            Family::Knn => "KNN",
            Family::Mlp => "MLP",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.slug() == s)
            .ok_or_else(|| Error::param("family", format!("unknown model family `{s}`")))
    }
}

/// Family-specific hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelParams {
    Logreg(LogRegParams),
    Forest(ForestParams),
    Gbt(GbtParams),
    Knn(KnnParams),
    Mlp(MlpParams),
}

impl ModelParams {
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Logreg => ModelParams::Logreg(LogRegParams::default()),
            Family::Forest => ModelParams::Forest(ForestParams::default()),
            Family::Gbt => ModelParams::Gbt(GbtParams::default()),
            Family::Knn => ModelParams::Knn(KnnParams::default()),
            Family::Mlp => ModelParams::Mlp(MlpParams::default()),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            ModelParams::Logreg(_) => Family::Logreg,
            ModelParams::Forest(_) => Family::Forest,
            ModelParams::Gbt(_) => Family::Gbt,
            ModelParams::Knn(_) => Family::Knn,
            ModelParams::Mlp(_) => Family::Mlp,
        }
    }
}

/// What to train: a family, its hyperparameters and a seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub params: ModelParams,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(params: ModelParams, seed: u64) -> Self {
        ModelSpec { params, seed }
    }

    pub fn default_for(family: Family, seed: u64) -> Self {
        ModelSpec::new(ModelParams::default_for(family), seed)
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn validate(&self) -> Result<()> {
        match &self.params {
            ModelParams::Logreg(p) => p.validate(),
            ModelParams::Forest(p) => p.validate(),
            ModelParams::Gbt(p) => p.validate(),
            ModelParams::Knn(p) => p.validate(),
            ModelParams::Mlp(p) => p.validate(),
        }
    }

    /// Trains a model. Parallel work (forest trees) goes through `exec`.
    pub fn fit<E: Executor>(&self, ds: &Dataset, exec: &E) -> Result<TrainedModel> {
        self.validate()?;
        let model = match &self.params {
            ModelParams::Logreg(p) => FittedModel::Logreg(logreg::fit(ds, p)?),
            ModelParams::Forest(p) => FittedModel::Forest(forest::fit(ds, p, self.seed, exec)?),
            ModelParams::Gbt(p) => FittedModel::Gbt(gbt::fit(ds, p)?),
            ModelParams::Knn(p) => FittedModel::Knn(knn::fit(ds, p)?),
            ModelParams::Mlp(p) => FittedModel::Mlp(mlp::fit(ds, p, self.seed)?),
        };
        Ok(TrainedModel {
            spec: self.clone(),
            n_features: ds.n_features(),
            model,
        })
    }
}

pub(crate) fn require_both_classes(ds: &Dataset) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let [neg, pos] = ds.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::precondition(
            "training data must contain both classes",
        ));
    }
    Ok(())
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

/// Parameters of a trained model, by family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FittedModel {
    Logreg(LogRegModel),
    Forest(ForestModel),
    Gbt(GbtModel),
    Knn(KnnModel),
    Mlp(MlpModel),
}

/// A fitted classifier together with the spec that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub n_features: usize,
    pub model: FittedModel,
}

impl TrainedModel {
    pub fn family(&self) -> Family {
        self.spec.family()
    }

    /// `P(y = 1 | x)`.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        Ok(self.proba_unchecked(x))
    }

    fn proba_unchecked(&self, x: &[f64]) -> f64 {
        match &self.model {
            FittedModel::Logreg(m) => m.predict_proba(x),
            FittedModel::Forest(m) => m.predict_proba(x),
            FittedModel::Gbt(m) => m.predict_proba(x),
            FittedModel::Knn(m) => m.predict_proba(x),
            FittedModel::Mlp(m) => m.predict_proba(x),
        }
    }

    /// Class 1 iff the probability is strictly greater than `threshold`.
    pub fn predict(&self, x: &[f64], threshold: f64) -> Result<u8> {
        check_threshold(threshold)?;
        Ok(u8::from(self.predict_proba(x)? > threshold))
    }

    /// Probabilities for every row of `ds`, in row order.
    pub fn predict_proba_all<E: Executor>(&self, ds: &Dataset, exec: &E) -> Result<Vec<f64>> {
        if ds.n_features() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: ds.n_features(),
            });
        }
        let chunks = ds.len().div_ceil(PREDICT_CHUNK);
        let parts = exec.map(chunks, |c| {
            let end = ((c + 1) * PREDICT_CHUNK).min(ds.len());
            (c * PREDICT_CHUNK..end)
                .map(|i| self.proba_unchecked(ds.row(i)))
                .collect::<Vec<f64>>()
        });
        Ok(parts.into_iter().flatten().collect())
    }
}

pub fn check_threshold(threshold: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::param(
            "threshold",
            format!("{threshold} is not in [0, 1]"),
        ));
    }
    Ok(())
}

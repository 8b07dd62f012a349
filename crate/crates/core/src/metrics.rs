//! Confusion matrices and the four per-class scores derived from them.
//!
//! Every score is a single division of two exact integer counts, so each
//! value is the correctly rounded `f64` of the true ratio. A `0 / 0` score
//! is reported as `0.0` and flagged as degenerate instead of becoming NaN.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Fingerprint};
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::models::{check_threshold, ModelSpec, TrainedModel};
use crate::resampling::ResamplePlan;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// The label counted as "positive".
    pub positive: u8,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionMatrix {
            tp,
            tn,
            fp,
            fn_,
            positive: 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// The same predictions seen from the other class.
    pub fn flipped(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
            positive: 1 - self.positive,
        }
    }
}

/// Counts outcomes with `positive` as the positive label.
pub fn confusion(y_true: &[u8], y_pred: &[u8], positive: u8) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    if positive > 1 {
        return Err(Error::param(
            "positive",
            format!("label {positive} is not 0 or 1"),
        ));
    }
    let mut cm = ConfusionMatrix {
        positive,
        ..ConfusionMatrix::default()
    };
    for (i, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        if t > 1 || p > 1 {
            return Err(Error::Validation {
                row: i,
                message: format!("labels must be 0 or 1, got truth {t} and prediction {p}"),
            });
        }
        match (t == positive, p == positive) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fn_ += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// `num / den`, or `(0, true)` when the denominator is zero.
fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp + cm.tn, cm.total()).0
}

pub fn precision(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp, cm.tp + cm.fp).0
}

pub fn recall(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp, cm.tp + cm.fn_).0
}

/// Harmonic mean of precision and recall, computed as `2tp / (2tp + fp + fn)`.
pub fn f1(cm: &ConfusionMatrix) -> f64 {
    ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn_).0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Precision,
    Recall,
    F1,
    Accuracy,
}

/// Scores for one class treated as positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub positive_class: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Rows whose true label is `positive_class`.
    pub support: u64,
    /// Scores whose denominator was zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate: Vec<Metric>,
}

impl ClassReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        let mut degenerate = Vec::new();
        let mut score = |metric, (value, flag): (f64, bool)| {
            if flag {
                degenerate.push(metric);
            }
            value
        };
        let precision = score(Metric::Precision, ratio(cm.tp, cm.tp + cm.fp));
        let recall = score(Metric::Recall, ratio(cm.tp, cm.tp + cm.fn_));
        let f1 = score(Metric::F1, ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn_));
        let accuracy = score(Metric::Accuracy, ratio(cm.tp + cm.tn, cm.total()));
        ClassReport {
            positive_class: cm.positive,
            precision,
            recall,
            f1,
            accuracy,
            support: cm.tp + cm.fn_,
            degenerate,
        }
    }
}

/// Where an evaluation's inputs came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalContext {
    /// Resampling applied to the training data, if any.
    pub plan: Option<ResamplePlan>,
    /// Which split was scored, e.g. `original-test`.
    pub split: String,
    pub seed: u64,
    /// Id of the scaler fitted on the training data, if features were scaled.
    pub scaler_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: ModelSpec,
    pub plan: Option<ResamplePlan>,
    pub split: String,
    pub seed: u64,
    pub scaler_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub class_1: ClassReport,
    pub class_0: ClassReport,
    /// Counts with class 1 as positive.
    pub confusion: ConfusionMatrix,
    pub threshold: f64,
    pub dataset: Fingerprint,
    pub provenance: Provenance,
}

impl EvalReport {
    pub fn class(&self, label: u8) -> &ClassReport {
        if label == 1 {
            &self.class_1
        } else {
            &self.class_0
        }
    }
}

/// Hard predictions `p > threshold` for a vector of probabilities.
pub fn threshold_predictions(proba: &[f64], threshold: f64) -> Vec<u8> {
    proba.iter().map(|&p| u8::from(p > threshold)).collect()
}

pub fn evaluate(
    model: &TrainedModel,
    ds: &Dataset,
    threshold: f64,
    ctx: EvalContext,
) -> Result<EvalReport> {
    evaluate_with(model, ds, threshold, ctx, &Sequential)
}

/// Scores `model` on `ds`, predicting class 1 iff `P(y = 1 | x) > threshold`.
pub fn evaluate_with<E: Executor>(
    model: &TrainedModel,
    ds: &Dataset,
    threshold: f64,
    ctx: EvalContext,
    exec: &E,
) -> Result<EvalReport> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_threshold(threshold)?;
    let proba = model.predict_proba_all(ds, exec)?;
    let pred = threshold_predictions(&proba, threshold);
    let cm = confusion(ds.labels(), &pred, 1)?;
    Ok(EvalReport {
        class_1: ClassReport::from_confusion(&cm),
        class_0: ClassReport::from_confusion(&cm.flipped()),
        confusion: cm,
        threshold,
        dataset: ds.fingerprint(),
        provenance: Provenance {
            model: model.spec.clone(),
            plan: ctx.plan,
            split: ctx.split,
            seed: ctx.seed,
            scaler_id: ctx.scaler_id,
        },
    })
}

//! Training-set fraud-ratio sweep for the hybrid sampler.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ResamplePlan, DEFAULT_MINORITY_MULTIPLIER, DEFAULT_SMOTE_K};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::metrics::{evaluate, EvalContext, EvalReport};
use crate::models::ModelSpec;
use crate::rng;

/// `n` log-spaced ratios from `lo` to `hi`; both endpoints are exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (a, b) = (libm::log(lo), libm::log(hi));
            let mut grid: Vec<f64> = (0..n)
                .map(|i| libm::exp(a + (b - a) * i as f64 / (n - 1) as f64))
                .collect();
            grid[0] = lo;
            grid[n - 1] = hi;
            grid
        }
    }
}

/// Twenty log-spaced ratios from 0.01 to 0.5.
pub fn default_ratio_grid() -> Vec<f64> {
    log_grid(0.01, 0.5, 20)
}

/// Settings shared by every point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub minority_multiplier: f64,
    pub smote_k: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            minority_multiplier: DEFAULT_MINORITY_MULTIPLIER,
            smote_k: DEFAULT_SMOTE_K,
            threshold: 0.5,
            seed: 0,
        }
    }
}

impl SweepSettings {
    /// The hybrid plan used at `ratio`. Its seed depends only on the master
    /// seed and the ratio, never on the ratio's position in the grid.
    pub fn plan_for(&self, ratio: f64) -> ResamplePlan {
        ResamplePlan::Hybrid {
            fraud_ratio: ratio,
            minority_multiplier: self.minority_multiplier,
            smote_k: self.smote_k,
            seed: rng::derive_seed_keyed(self.seed, "sweep-ratio", ratio.to_bits()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SweepOutcome {
    Ok { report: Box<EvalReport> },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub ratio: f64,
    pub plan: ResamplePlan,
    pub outcome: SweepOutcome,
}

impl SweepPoint {
    pub fn report(&self) -> Option<&EvalReport> {
        match &self.outcome {
            SweepOutcome::Ok { report } => Some(report),
            SweepOutcome::Skipped { .. } => None,
        }
    }

    pub fn skipped_reason(&self) -> Option<&str> {
        match &self.outcome {
            SweepOutcome::Ok { .. } => None,
            SweepOutcome::Skipped { reason } => Some(reason),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSweepResult {
    pub model: ModelSpec,
    pub settings: SweepSettings,
    /// One point per requested ratio, in request order.
    pub points: Vec<SweepPoint>,
}

impl RatioSweepResult {
    pub fn successful(&self) -> impl Iterator<Item = (f64, &EvalReport)> {
        self.points
            .iter()
            .filter_map(|p| p.report().map(|r| (p.ratio, r)))
    }
}

fn check_ratios(ratios: &[f64]) -> Result<()> {
    if ratios.is_empty() {
        return Err(Error::param("ratios", "the ratio grid is empty"));
    }
    if let Some(r) = ratios.iter().find(|&&r| !(r > 0.0 && r <= 0.5)) {
        return Err(Error::param("ratios", format!("{r} is not in (0, 0.5]")));
    }
    Ok(())
}

fn check_disjoint(train: &Dataset, eval: &Dataset) -> Result<()> {
    let train_ids = train.source_ids();
    if let Some(id) = eval.source_ids().iter().find(|id| train_ids.contains(id)) {
        return Err(Error::Leakage(format!(
            "row {id} is in both the training and the evaluation set"
        )));
    }
    Ok(())
}

/// Hybrid-resamples `train` at `ratio`, fits `model` and scores it on the
/// untouched `eval` set. An infeasible ratio, or a resampled set the model
/// cannot be fitted on, becomes a skipped point.
pub fn sweep_point(
    train: &Dataset,
    eval: &Dataset,
    ratio: f64,
    model: &ModelSpec,
    settings: &SweepSettings,
) -> Result<SweepPoint> {
    let plan = settings.plan_for(ratio);
    let resampled = match plan.apply(train) {
        Ok(ds) => ds,
        Err(Error::Infeasible { reason, remedy }) => {
            return Ok(SweepPoint {
                ratio,
                plan,
                outcome: SweepOutcome::Skipped {
                    reason: format!("{reason}; {remedy}"),
                },
            })
        }
        Err(e) => return Err(e),
    };
    let trained = match model.fit(&resampled, &Sequential) {
        Ok(t) => t,
        Err(Error::Precondition(reason)) => {
            return Ok(SweepPoint {
                ratio,
                plan,
                outcome: SweepOutcome::Skipped { reason },
            })
        }
        Err(e) => return Err(e),
    };
    let ctx = EvalContext {
        plan: Some(plan.clone()),
        split: String::from("sweep"),
        seed: settings.seed,
        scaler_id: None,
    };
    let report = evaluate(&trained, eval, settings.threshold, ctx)?;
    Ok(SweepPoint {
        ratio,
        plan,
        outcome: SweepOutcome::Ok {
            report: Box::new(report),
        },
    })
}

/// Runs [`sweep_point`] for every ratio. Points may be computed in parallel
/// but are returned in the order of `ratios`.
pub fn ratio_sweep<E: Executor>(
    train: &Dataset,
    eval: &Dataset,
    ratios: &[f64],
    model: &ModelSpec,
    settings: &SweepSettings,
    exec: &E,
) -> Result<RatioSweepResult> {
    check_ratios(ratios)?;
    model.validate()?;
    check_disjoint(train, eval)?;
    let points = exec
        .map(ratios.len(), |i| {
            sweep_point(train, eval, ratios[i], model, settings)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioSweepResult {
        model: model.clone(),
        settings: settings.clone(),
        points,
    })
}

/// How to pick one ratio from a sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionCriterion {
    /// Highest class-1 F1; ties go to the smaller ratio.
    #[default]
    MaxF1,
    /// Highest class-1 recall among ratios whose precision reaches the
    /// floor; ties go to the smaller ratio.
    MinPrecisionFloor(f64),
    /// Not implemented; selecting with it is an error.
    Knee,
}

impl fmt::Display for SelectionCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionCriterion::MaxF1 => f.write_str("max_f1"),
            SelectionCriterion::MinPrecisionFloor(p) => write!(f, "min_precision_floor={p}"),
            SelectionCriterion::Knee => f.write_str("knee"),
        }
    }
}

impl FromStr for SelectionCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max_f1" => Ok(SelectionCriterion::MaxF1),
            "knee" => Ok(SelectionCriterion::Knee),
            _ => {
                let floor = s.strip_prefix("min_precision_floor=").ok_or_else(|| {
                    Error::param("criterion", format!("unknown selection criterion `{s}`"))
                })?;
                let p: f64 = floor
                    .parse()
                    .map_err(|_| Error::param("criterion", format!("`{floor}` is not a number")))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::param(
                        "criterion",
                        format!("precision floor {p} is not in [0, 1]"),
                    ));
                }
                Ok(SelectionCriterion::MinPrecisionFloor(p))
            }
        }
    }
}

/// Picks a ratio from the successful points of `sweep`.
pub fn select_ratio(sweep: &RatioSweepResult, criterion: SelectionCriterion) -> Result<f64> {
    let mut candidates: Vec<(f64, &EvalReport)> = sweep.successful().collect();
    if candidates.is_empty() {
        return Err(Error::precondition("the sweep has no successful points"));
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let best = |score: &dyn Fn(&EvalReport) -> f64, pool: &[(f64, &EvalReport)]| {
        let mut best: Option<(f64, f64)> = None;
        for &(ratio, report) in pool {
            let s = score(report);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((ratio, s));
            }
        }
        best.map(|(r, _)| r)
    };
    match criterion {
        SelectionCriterion::MaxF1 => Ok(best(&|r| r.class_1.f1, &candidates).expect("non-empty")),
        SelectionCriterion::MinPrecisionFloor(p) => {
            let pool: Vec<_> = candidates
                .into_iter()
                .filter(|(_, r)| r.class_1.precision >= p)
                .collect();
            best(&|r| r.class_1.recall, &pool).ok_or_else(|| {
                Error::precondition(format!("no swept ratio reaches precision floor {p}"))
            })
        }
        SelectionCriterion::Knee => Err(Error::param(
            "criterion",
            "knee selection is not implemented".to_string(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, stratified_split, SyntheticSpec};
    use crate::metrics::{ClassReport, ConfusionMatrix, Provenance};
    use crate::models::{Family, ModelSpec};
    use alloc::vec;

    fn report_with(f1_tp: u64, fp: u64, fn_: u64) -> EvalReport {
        let cm = ConfusionMatrix::new(f1_tp, 1000, fp, fn_);
        EvalReport {
            class_1: ClassReport::from_confusion(&cm),
            class_0: ClassReport::from_confusion(&cm.flipped()),
            confusion: cm,
            threshold: 0.5,
            dataset: crate::dataset::Fingerprint {
                rows: 0,
                frauds: 0,
                sha256: String::new(),
            },
            provenance: Provenance {
                model: ModelSpec::default_for(Family::Logreg, 0),
                plan: None,
                split: String::new(),
                seed: 0,
                scaler_id: None,
            },
        }
    }

    fn sweep_of(points: Vec<(f64, Option<EvalReport>)>) -> RatioSweepResult {
        let settings = SweepSettings::default();
        RatioSweepResult {
            model: ModelSpec::default_for(Family::Logreg, 0),
            points: points
                .into_iter()
                .map(|(ratio, rep)| SweepPoint {
                    ratio,
                    plan: settings.plan_for(ratio),
                    outcome: match rep {
                        Some(report) => SweepOutcome::Ok {
                            report: Box::new(report),
                        },
                        None => SweepOutcome::Skipped {
                            reason: String::from("infeasible"),
                        },
                    },
                })
                .collect(),
            settings,
        }
    }

    #[test]
    fn grid_endpoints_and_spacing() {
        let g = default_ratio_grid();
        assert_eq!(g.len(), 20);
        assert_eq!((g[0], g[19]), (0.01, 0.5));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let q = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - q).abs() < 1e-12));
    }

    #[test]
    fn max_f1_picks_argmax() {
        // F1s 0.3, 0.8, 0.5 via 2tp / (2tp + fp + fn).
        let s = sweep_of(vec![
            (0.01, Some(report_with(3, 7, 7))),
            (0.02, Some(report_with(8, 2, 2))),
            (0.05, Some(report_with(5, 5, 5))),
        ]);
        assert_eq!(select_ratio(&s, SelectionCriterion::MaxF1).unwrap(), 0.02);
    }

    #[test]
    fn f1_tie_goes_to_smaller_ratio() {
        let s = sweep_of(vec![
            (0.1, Some(report_with(5, 5, 5))),
            (0.05, Some(report_with(5, 5, 5))),
            (0.2, None),
        ]);
        assert_eq!(select_ratio(&s, SelectionCriterion::MaxF1).unwrap(), 0.05);
    }

    #[test]
    fn precision_floor() {
        let s = sweep_of(vec![
            (0.01, Some(report_with(5, 0, 5))),
            (0.1, Some(report_with(8, 8, 2))),
            (0.5, Some(report_with(9, 30, 1))),
        ]);
        assert_eq!(
            select_ratio(&s, SelectionCriterion::MinPrecisionFloor(0.5)).unwrap(),
            0.1
        );
        assert_eq!(
            select_ratio(&s, SelectionCriterion::MinPrecisionFloor(0.9)).unwrap(),
            0.01
        );
        let err = select_ratio(&s, SelectionCriterion::MinPrecisionFloor(1.1)).unwrap_err();
        assert!(format!("{err}").contains("1.1"));
    }

    #[test]
    fn empty_and_knee_are_errors() {
        let s = sweep_of(vec![(0.1, None)]);
        assert!(select_ratio(&s, SelectionCriterion::MaxF1).is_err());
        let s = sweep_of(vec![(0.1, Some(report_with(5, 5, 5)))]);
        assert!(select_ratio(&s, SelectionCriterion::Knee).is_err());
    }

    #[test]
    fn criterion_parsing() {
        assert_eq!(
            "max_f1".parse::<SelectionCriterion>().unwrap(),
            SelectionCriterion::MaxF1
        );
        assert_eq!(
            "min_precision_floor=0.25"
                .parse::<SelectionCriterion>()
                .unwrap(),
            SelectionCriterion::MinPrecisionFloor(0.25)
        );
        assert!("elbow".parse::<SelectionCriterion>().is_err());
        assert!("min_precision_floor=2"
            .parse::<SelectionCriterion>()
            .is_err());
    }

    #[test]
    fn infeasible_ratio_is_skipped_and_order_does_not_matter() {
        let ds = generate_synthetic(&SyntheticSpec::new(600, 30, 3, 3.0, 9)).unwrap();
        let (train, test) = stratified_split(&ds, 0.25, 1).unwrap();
        let model = ModelSpec::default_for(Family::Knn, 0);
        let settings = SweepSettings {
            minority_multiplier: 2.0,
            smote_k: 3,
            threshold: 0.5,
            seed: 4,
        };
        let a = ratio_sweep(
            &train,
            &test,
            &[0.01, 0.1, 0.5],
            &model,
            &settings,
            &Sequential,
        )
        .unwrap();
        assert!(a.points[0].skipped_reason().is_some());
        assert!(a.points[1].report().is_some());
        let b = ratio_sweep(&train, &test, &[0.5, 0.1], &model, &settings, &Sequential).unwrap();
        assert_eq!(a.points[1], b.points[1]);
        assert_eq!(a.points[2], b.points[0]);
    }

    #[test]
    fn overlapping_sets_are_rejected() {
        let ds = generate_synthetic(&SyntheticSpec::new(200, 20, 2, 3.0, 9)).unwrap();
        let model = ModelSpec::default_for(Family::Knn, 0);
        let err = ratio_sweep(
            &ds,
            &ds,
            &[0.1],
            &model,
            &SweepSettings::default(),
            &Sequential,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Leakage(_)));
    }
}

//! Changing the class balance of a training set.
//!
//! Three samplers, all pure functions of `(dataset, parameters, seed)`:
//!
//! * [`undersample`] drops majority rows at random;
//! * [`smote`] adds minority rows interpolated between a minority row and
//!   one of its nearest minority neighbours;
//! * [`hybrid`] runs SMOTE to a multiple of the minority count and then
//!   undersamples the majority until a target fraud ratio is reached.
//!
//! Every sampler first orders candidate rows by row id, so the selected set
//! does not depend on how the input happens to be stored.

mod sweep;

pub use sweep::{
    default_ratio_grid, log_grid, ratio_sweep, select_ratio, sweep_point, RatioSweepResult,
    SelectionCriterion, SweepOutcome, SweepPoint, SweepSettings,
};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SyntheticOrigin};
use crate::error::{Error, Result};
use crate::neighbors::k_nearest;
use crate::rng;

pub const DEFAULT_SMOTE_K: usize = 5;
pub const DEFAULT_MINORITY_MULTIPLIER: f64 = 10.0;

/// A fully specified resampling step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResamplePlan {
    Undersample {
        target_majority: usize,
        seed: u64,
    },
    Smote {
        target_minority: usize,
        k: usize,
        seed: u64,
    },
    Hybrid {
        fraud_ratio: f64,
        minority_multiplier: f64,
        smote_k: usize,
        seed: u64,
    },
}

impl ResamplePlan {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ResamplePlan::Undersample { .. } => Ok(()),
            ResamplePlan::Smote { k, .. } => check_k(k),
            ResamplePlan::Hybrid {
                fraud_ratio,
                minority_multiplier,
                smote_k,
                ..
            } => {
                check_ratio(fraud_ratio)?;
                check_multiplier(minority_multiplier)?;
                check_k(smote_k)
            }
        }
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        self.validate()?;
        match *self {
            ResamplePlan::Undersample {
                target_majority,
                seed,
            } => undersample(ds, target_majority, seed),
            ResamplePlan::Smote {
                target_minority,
                k,
                seed,
            } => smote(ds, target_minority, k, seed),
            ResamplePlan::Hybrid {
                fraud_ratio,
                minority_multiplier,
                smote_k,
                seed,
            } => hybrid(ds, fraud_ratio, minority_multiplier, smote_k, seed),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ResamplePlan::Undersample { .. } => "undersample",
            ResamplePlan::Smote { .. } => "smote",
            ResamplePlan::Hybrid { .. } => "hybrid",
        }
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::param("smote_k", "must be at least 1"));
    }
    Ok(())
}

fn check_ratio(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(Error::param(
            "fraud_ratio",
            format!("{r} is not in (0, 0.5]"),
        ));
    }
    Ok(())
}

fn check_multiplier(m: f64) -> Result<()> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::param(
            "minority_multiplier",
            format!("{m} must be finite and >= 1"),
        ));
    }
    Ok(())
}

/// Minority positions ordered by row id.
fn sorted_class(ds: &Dataset, label: u8) -> Vec<usize> {
    let mut idx = ds.indices_of(label);
    idx.sort_unstable_by_key(|&i| ds.row_id(i));
    idx
}

/// Keeps every minority row and exactly `target_majority` majority rows
/// chosen uniformly at random. Output rows keep their input order.
pub fn undersample(ds: &Dataset, target_majority: usize, seed: u64) -> Result<Dataset> {
    let mut majority = sorted_class(ds, 0);
    if target_majority > majority.len() {
        return Err(Error::Infeasible {
            reason: format!(
                "undersampling target {target_majority} exceeds the {} majority rows available",
                majority.len()
            ),
            remedy: String::from("choose a target no larger than the current majority count"),
        });
    }
    majority.shuffle(&mut rng::stream(rng::derive_seed(seed, "undersample")));
    let mut keep = alloc::vec![false; ds.len()];
    for &i in &majority[..target_majority] {
        keep[i] = true;
    }
    let selected: Vec<usize> = (0..ds.len())
        .filter(|&i| ds.label(i) == 1 || keep[i])
        .collect();
    Ok(ds.select(&selected))
}

/// Grows the minority class to `target_minority` rows by interpolation.
///
/// Base rows are visited round-robin in a seeded order, so synthetic counts
/// per base row differ by at most one. For each synthetic row a neighbour
/// is drawn uniformly from the base row's `k` nearest minority rows (self
/// excluded) and `u` uniformly from `[0, 1]`. Majority rows are untouched;
/// synthetic rows are appended after the input rows.
pub fn smote(ds: &Dataset, target_minority: usize, k: usize, seed: u64) -> Result<Dataset> {
    check_k(k)?;
    let minority = sorted_class(ds, 1);
    let m = minority.len();
    if m < 2 {
        return Err(Error::precondition(format!(
            "SMOTE needs at least 2 minority rows, found {m}"
        )));
    }
    if k > m - 1 {
        return Err(Error::param(
            "smote_k",
            format!("{k} exceeds minority count - 1 ({})", m - 1),
        ));
    }
    if target_minority < m {
        return Err(Error::precondition(format!(
            "SMOTE target {target_minority} is below the current minority count {m}"
        )));
    }
    let to_make = target_minority - m;
    if to_make == 0 {
        return Ok(ds.clone());
    }

    let d = ds.n_features();
    let mut points = Vec::with_capacity(m * d);
    for &i in &minority {
        points.extend_from_slice(ds.row(i));
    }
    let ids: Vec<_> = minority.iter().map(|&i| ds.row_id(i)).collect();
    let neighbours: Vec<Vec<usize>> = (0..m)
        .map(|j| {
            k_nearest(&points[j * d..(j + 1) * d], &points, d, &ids, k, Some(j))
                .into_iter()
                .map(|n| n.index)
                .collect()
        })
        .collect();

    let mut rng = rng::stream(rng::derive_seed(seed, "smote"));
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);

    let mut rows = Vec::with_capacity(to_make * d);
    let mut origins = Vec::with_capacity(to_make);
    for s in 0..to_make {
        let base = order[s % m];
        let nn = neighbours[base][rng.random_range(0..k)];
        let u: f64 = rng.random_range(0.0..=1.0);
        let x = &points[base * d..(base + 1) * d];
        let y = &points[nn * d..(nn + 1) * d];
        rows.extend(x.iter().zip(y).map(|(a, b)| a + u * (b - a)));
        origins.push(SyntheticOrigin {
            base: ids[base],
            neighbor: ids[nn],
            u,
        });
    }
    Ok(ds.with_synthetic(rows, origins))
}

/// Class counts a hybrid plan will produce, `(minority, majority)`, or the
/// reason it cannot run.
pub fn hybrid_sizes(
    minority: usize,
    majority: usize,
    fraud_ratio: f64,
    minority_multiplier: f64,
) -> Result<(usize, usize)> {
    check_ratio(fraud_ratio)?;
    check_multiplier(minority_multiplier)?;
    let m = libm::round(minority_multiplier * minority as f64) as usize;
    let target = libm::round(m as f64 * (1.0 - fraud_ratio) / fraud_ratio) as usize;
    if target > majority {
        return Err(Error::Infeasible {
            reason: format!(
                "fraud ratio {fraud_ratio} with {m} minority rows needs {target} majority rows, only {majority} available"
            ),
            remedy: String::from("use a smaller minority_multiplier or a larger fraud_ratio"),
        });
    }
    Ok((m, target))
}

/// SMOTE to `round(minority_multiplier * minority)` rows, then undersample
/// the majority to `round(m' * (1 - r) / r)` rows.
pub fn hybrid(
    ds: &Dataset,
    fraud_ratio: f64,
    minority_multiplier: f64,
    smote_k: usize,
    seed: u64,
) -> Result<Dataset> {
    let [majority, minority] = ds.class_counts();
    let (m, target) = hybrid_sizes(minority, majority, fraud_ratio, minority_multiplier)?;
    let oversampled = smote(ds, m, smote_k, rng::derive_seed(seed, "hybrid-smote"))?;
    undersample(
        &oversampled,
        target,
        rng::derive_seed(seed, "hybrid-undersample"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, RowId, SyntheticSpec};
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn data() -> Dataset {
        generate_synthetic(&SyntheticSpec::new(400, 20, 3, 2.0, 5)).unwrap()
    }

    #[test]
    fn undersample_keeps_minority_and_hits_target() {
        let ds = data();
        let out = undersample(&ds, 20, 1).unwrap();
        assert_eq!(out.class_counts(), [20, 20]);
        let input: BTreeSet<RowId> = ds.row_ids().iter().copied().collect();
        assert!(out.row_ids().iter().all(|id| input.contains(id)));
        assert_eq!(out, undersample(&ds, 20, 1).unwrap());
        assert!(matches!(
            undersample(&ds, 401, 1),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn undersample_to_current_count_is_identity() {
        let ds = data();
        assert_eq!(undersample(&ds, 400, 3).unwrap(), ds);
    }

    #[test]
    fn smote_zero_rows_is_identity() {
        let ds = data();
        assert_eq!(smote(&ds, 20, 5, 0).unwrap(), ds);
    }

    #[test]
    fn smote_two_points_in_one_dimension() {
        let ds = Dataset::from_rows(
            vec!["x".into()],
            &[vec![0.0], vec![1.0], vec![9.0]],
            vec![1, 1, 0],
        )
        .unwrap();
        let out = smote(&ds, 3, 1, 4).unwrap();
        assert_eq!(out.class_counts(), [1, 3]);
        let v = out.row(3)[0];
        assert!((0.0..=1.0).contains(&v));
        let o = out.origin(3).unwrap();
        assert!(out.row_id(3).is_synthetic());
        assert_eq!(v, if o.base == RowId(0) { o.u } else { 1.0 - o.u });
    }

    #[test]
    fn smote_round_robin_balance() {
        let ds = data();
        let out = smote(&ds, 20 + 47, 3, 2).unwrap();
        let mut per_base = alloc::collections::BTreeMap::new();
        for i in 0..out.len() {
            if let Some(o) = out.origin(i) {
                *per_base.entry(o.base).or_insert(0usize) += 1;
            }
        }
        let lo = per_base.values().min().unwrap();
        let hi = per_base.values().max().unwrap();
        assert_eq!(per_base.len(), 20);
        assert!(hi - lo <= 1);
    }

    #[test]
    fn smote_errors() {
        let ds = data();
        assert!(matches!(smote(&ds, 10, 5, 0), Err(Error::Precondition(_))));
        assert!(matches!(
            smote(&ds, 30, 20, 0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            smote(&ds, 30, 0, 0),
            Err(Error::InvalidParameter { .. })
        ));
        let one =
            Dataset::from_rows(vec!["x".into()], &[vec![0.0], vec![1.0]], vec![1, 0]).unwrap();
        assert!(matches!(smote(&one, 3, 1, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn hybrid_sizing_on_full_size_train_counts() {
        assert_eq!(
            hybrid_sizes(369, 213_236, 0.02, 10.0).unwrap(),
            (3690, 180_810)
        );
        let err = hybrid_sizes(369, 213_236, 0.01, 10.0).unwrap_err();
        let text = alloc::format!("{err}");
        assert!(
            text.contains("minority_multiplier") && text.contains("fraud_ratio"),
            "{text}"
        );
    }

    #[test]
    fn hybrid_fixed_point_and_balanced_boundary() {
        let ds = data();
        let out = hybrid(&ds, 20.0 / 420.0, 1.0, 5, 9).unwrap();
        assert_eq!(out, ds);
        let out = hybrid(&ds, 0.5, 1.0, 5, 9).unwrap();
        assert_eq!(out.class_counts(), [20, 20]);
        assert_eq!(out.synthetic_count(), 0);
    }

    #[test]
    fn hybrid_ratio_is_within_one_row() {
        let ds = generate_synthetic(&SyntheticSpec::new(5000, 25, 2, 2.0, 5)).unwrap();
        for r in [0.01, 0.02, 0.1, 0.5] {
            let out = hybrid(&ds, r, 2.0, 5, 1).unwrap();
            assert!((out.fraud_fraction() - r).abs() <= 1.0 / out.len() as f64);
            assert_eq!(out.fraud_count(), 50);
        }
    }

    #[test]
    fn plan_validation() {
        let bad = ResamplePlan::Hybrid {
            fraud_ratio: 0.6,
            minority_multiplier: 1.0,
            smote_k: 5,
            seed: 0,
        };
        assert!(bad.validate().is_err());
        let plan = ResamplePlan::Undersample {
            target_majority: 20,
            seed: 0,
        };
        assert_eq!(plan.apply(&data()).unwrap().len(), 40);
    }
}

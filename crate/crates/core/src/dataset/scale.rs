use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Dataset;
use crate::error::{Error, Result};

/// Median / IQR parameters for one column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub index: usize,
    pub name: String,
    pub center: f64,
    pub spread: f64,
    /// Zero interquartile range; the column scales to 0.
    pub constant: bool,
}

/// Robust scaling parameters, together with the identity of the rows they
/// were fitted on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub feature_names: Vec<String>,
    pub columns: Vec<ColumnScale>,
    pub fitted_rows: usize,
    /// [`Dataset::id_set_hash`] of the fitting data.
    pub fitted_on: String,
}

/// Quantile of sorted data with linear interpolation between order
/// statistics: position `h = (n - 1) p`.
pub fn quantile_linear(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Fits `center = median`, `spread = Q3 - Q1` for each named column.
pub fn fit_robust_scaler<S: AsRef<str>>(ds: &Dataset, columns: &[S]) -> Result<ScalerParams> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut out = Vec::with_capacity(columns.len());
    let mut values = Vec::with_capacity(ds.len());
    for name in columns {
        let name = name.as_ref();
        let index = ds
            .column_index(name)
            .ok_or_else(|| Error::Schema(format!("no column named `{name}` to scale")))?;
        values.clear();
        values.extend(ds.rows().map(|r| r[index]));
        values.sort_unstable_by(f64::total_cmp);
        let center = quantile_linear(&values, 0.5);
        let spread = quantile_linear(&values, 0.75) - quantile_linear(&values, 0.25);
        out.push(ColumnScale {
            index,
            name: String::from(name),
            center,
            spread,
            constant: spread == 0.0,
        });
    }
    Ok(ScalerParams {
        feature_names: ds.feature_names().to_vec(),
        columns: out,
        fitted_rows: ds.len(),
        fitted_on: ds.id_set_hash(),
    })
}

impl ScalerParams {
    fn check(&self, ds: &Dataset) -> Result<()> {
        if ds.feature_names() != self.feature_names.as_slice() {
            return Err(Error::Schema(String::from(
                "scaler was fitted on a dataset with different columns",
            )));
        }
        Ok(())
    }

    /// `(x - center) / spread` on the fitted columns; constant columns map to 0.
    /// Labels, ids and the other columns are untouched.
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        self.check(ds)?;
        let d = ds.n_features();
        let mut features = ds.features().to_vec();
        for row in features.chunks_exact_mut(d) {
            for c in &self.columns {
                row[c.index] = if c.constant {
                    0.0
                } else {
                    (row[c.index] - c.center) / c.spread
                };
            }
        }
        Ok(ds.with_features(features))
    }

    /// Inverse of [`apply`](Self::apply). Constant columns come back as their
    /// center.
    pub fn invert(&self, ds: &Dataset) -> Result<Dataset> {
        self.check(ds)?;
        let d = ds.n_features();
        let mut features = ds.features().to_vec();
        for row in features.chunks_exact_mut(d) {
            for c in &self.columns {
                row[c.index] = if c.constant {
                    c.center
                } else {
                    row[c.index] * c.spread + c.center
                };
            }
        }
        Ok(ds.with_features(features))
    }

    /// Short content id used to link a trained model to its scaler.
    pub fn id(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.fitted_on.as_bytes());
        for c in &self.columns {
            hasher.update((c.index as u64).to_le_bytes());
            hasher.update(c.center.to_bits().to_le_bytes());
            hasher.update(c.spread.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        hex::encode(&digest[..8])
    }
}

//! Labeled transaction matrices and the operations that prepare them:
//! robust scaling, stratified / random splitting and synthetic generation.

mod scale;
mod split;
mod synthetic;

pub use scale::{fit_robust_scaler, quantile_linear, ColumnScale, ScalerParams};
pub use split::{random_split, stratified_split};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The label column of the transaction file.
pub const LABEL_COLUMN: &str = "Class";

/// Columns of the public card-transaction dataset, label excluded.
pub fn transaction_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(30);
    names.push(String::from("Time"));
    for i in 1..=28 {
        names.push(format!("V{i}"));
    }
    names.push(String::from("Amount"));
    names
}

/// Stable identity of a row across splitting and resampling.
///
/// Rows loaded from a file are numbered `0..n` in file order. Rows produced by
/// SMOTE live in a separate id space (top bit set) so they can never collide
/// with an original row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RowId(pub u64);

impl RowId {
    const SYNTHETIC_BIT: u64 = 1 << 63;

    pub fn synthetic(counter: u64) -> Self {
        RowId(Self::SYNTHETIC_BIT | counter)
    }

    pub fn is_synthetic(self) -> bool {
        self.0 & Self::SYNTHETIC_BIT != 0
    }

    fn synthetic_counter(self) -> Option<u64> {
        self.is_synthetic().then_some(self.0 & !Self::SYNTHETIC_BIT)
    }
}

impl fmt::Display for RowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.synthetic_counter() {
            Some(c) => write!(f, "s{c}"),
            None => write!(f, "{}", self.0),
        }
    }
}

impl FromStr for RowId {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form: `17` or `s3`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Schema(format!("`{s}` is not a row id"));
        match s.strip_prefix('s') {
            Some(c) => {
                let c: u64 = c.parse().map_err(|_| bad())?;
                if c & Self::SYNTHETIC_BIT != 0 {
                    return Err(bad());
                }
                Ok(RowId::synthetic(c))
            }
            None => {
                let v: u64 = s.parse().map_err(|_| bad())?;
                if v & Self::SYNTHETIC_BIT != 0 {
                    return Err(bad());
                }
                Ok(RowId(v))
            }
        }
    }
}

/// Where a SMOTE row came from: `base + u * (neighbor - base)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticOrigin {
    pub base: RowId,
    pub neighbor: RowId,
    pub u: f64,
}

/// Row count, fraud count and a content hash of a dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub rows: usize,
    pub frauds: usize,
    pub sha256: String,
}

/// A dense, immutable, row-major feature matrix with binary labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    features: Vec<f64>,
    labels: Vec<u8>,
    row_ids: Vec<RowId>,
    origins: Vec<Option<SyntheticOrigin>>,
}

impl Dataset {
    /// Builds a dataset from a flat row-major matrix, checking every
    /// invariant: shapes agree, labels are 0/1, values are finite and row ids
    /// are unique.
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<f64>,
        labels: Vec<u8>,
        row_ids: Vec<RowId>,
    ) -> Result<Self> {
        let n = labels.len();
        let origins = alloc::vec![None; n];
        let ds = Dataset {
            feature_names,
            features,
            labels,
            row_ids,
            origins,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Builds a dataset from rows, numbering them `0..n`.
    pub fn from_rows(
        feature_names: Vec<String>,
        rows: &[Vec<f64>],
        labels: Vec<u8>,
    ) -> Result<Self> {
        let d = feature_names.len();
        let mut features = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Validation {
                    row: i,
                    message: format!("expected {d} values, found {}", row.len()),
                });
            }
            features.extend_from_slice(row);
        }
        let ids = (0..rows.len() as u64).map(RowId).collect();
        Dataset::new(feature_names, features, labels, ids)
    }

    fn validate(&self) -> Result<()> {
        let d = self.feature_names.len();
        let n = self.labels.len();
        if d == 0 {
            return Err(Error::Schema(String::from(
                "dataset has no feature columns",
            )));
        }
        if self.features.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                actual: self.features.len(),
            });
        }
        if self.row_ids.len() != n || self.origins.len() != n {
            return Err(Error::precondition("row id count differs from label count"));
        }
        for (i, &y) in self.labels.iter().enumerate() {
            if y > 1 {
                return Err(Error::Validation {
                    row: i,
                    message: format!("label {y} is not 0 or 1"),
                });
            }
        }
        if let Some(pos) = self.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation {
                row: pos / d,
                message: format!(
                    "non-finite value in column `{}`",
                    self.feature_names[pos % d]
                ),
            });
        }
        let mut ids = self.row_ids.clone();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::precondition(format!("duplicate row id {}", w[0])));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|c| c == name)
    }

    /// The whole matrix, row-major.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.features[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features())
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn row_ids(&self) -> &[RowId] {
        &self.row_ids
    }

    pub fn row_id(&self, i: usize) -> RowId {
        self.row_ids[i]
    }

    pub fn origin(&self, i: usize) -> Option<&SyntheticOrigin> {
        self.origins[i].as_ref()
    }

    pub fn synthetic_count(&self) -> usize {
        self.origins.iter().filter(|o| o.is_some()).count()
    }

    /// `[non-fraud, fraud]` row counts.
    pub fn class_counts(&self) -> [usize; 2] {
        let fraud = self.labels.iter().filter(|&&y| y == 1).count();
        [self.len() - fraud, fraud]
    }

    pub fn fraud_count(&self) -> usize {
        self.class_counts()[1]
    }

    pub fn fraud_fraction(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.fraud_count() as f64 / self.len() as f64
        }
    }

    /// Positions of the rows carrying `label`, in storage order.
    pub fn indices_of(&self, label: u8) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }

    /// A new dataset holding the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let d = self.n_features();
        let mut features = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            feature_names: self.feature_names.clone(),
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            row_ids: indices.iter().map(|&i| self.row_ids[i]).collect(),
            origins: indices.iter().map(|&i| self.origins[i]).collect(),
        }
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.feature_names != other.feature_names {
            return Err(Error::Schema(String::from(
                "cannot concatenate datasets with different columns",
            )));
        }
        let mut out = self.clone();
        out.features.extend_from_slice(&other.features);
        out.labels.extend_from_slice(&other.labels);
        out.row_ids.extend_from_slice(&other.row_ids);
        out.origins.extend_from_slice(&other.origins);
        out.validate()?;
        Ok(out)
    }

    /// Appends SMOTE rows. Ids are allocated after the largest synthetic id
    /// already present.
    pub(crate) fn with_synthetic(&self, rows: Vec<f64>, origins: Vec<SyntheticOrigin>) -> Dataset {
        debug_assert_eq!(rows.len(), origins.len() * self.n_features());
        let next = self
            .row_ids
            .iter()
            .filter_map(|id| id.synthetic_counter())
            .max()
            .map_or(0, |c| c + 1);
        let mut out = self.clone();
        out.features.extend_from_slice(&rows);
        for (j, origin) in origins.into_iter().enumerate() {
            out.labels.push(1);
            out.row_ids.push(RowId::synthetic(next + j as u64));
            out.origins.push(Some(origin));
        }
        out
    }

    pub(crate) fn with_features(&self, features: Vec<f64>) -> Dataset {
        debug_assert_eq!(features.len(), self.features.len());
        Dataset {
            features,
            ..self.clone()
        }
    }

    /// Ids of the original rows this dataset draws information from: the row
    /// itself for loaded rows, base and neighbour for synthetic rows.
    pub fn source_ids(&self) -> BTreeSet<RowId> {
        let mut out = BTreeSet::new();
        for (id, origin) in self.row_ids.iter().zip(&self.origins) {
            match origin {
                Some(o) => {
                    out.insert(o.base);
                    out.insert(o.neighbor);
                }
                None => {
                    out.insert(*id);
                }
            }
        }
        out
    }

    /// Content hash over column names, row ids, labels and the exact bits of
    /// every feature value, in storage order.
    pub fn fingerprint(&self) -> Fingerprint {
        let mut hasher = Sha256::new();
        for name in &self.feature_names {
            hasher.update((name.len() as u64).to_le_bytes());
            hasher.update(name.as_bytes());
        }
        for i in 0..self.len() {
            hasher.update(self.row_ids[i].0.to_le_bytes());
            hasher.update([self.labels[i]]);
            for v in self.row(i) {
                hasher.update(v.to_bits().to_le_bytes());
            }
        }
        Fingerprint {
            rows: self.len(),
            frauds: self.fraud_count(),
            sha256: hex::encode(hasher.finalize()),
        }
    }

    /// Hash of the sorted row-id set; independent of row order and values.
    pub fn id_set_hash(&self) -> String {
        let mut ids = self.row_ids.clone();
        ids.sort_unstable();
        let mut hasher = Sha256::new();
        for id in ids {
            hasher.update(id.0.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

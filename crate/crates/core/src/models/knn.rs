use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, RowId};
use crate::error::{Error, Result};
use crate::neighbors::k_nearest;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

impl KnnParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("k", "must be at least 1"));
        }
        Ok(())
    }
}

/// Stores the training rows; prediction is the fraction of fraud labels
/// among the `k` nearest of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_features: usize,
    pub features: Vec<f64>,
    pub labels: Vec<u8>,
    pub row_ids: Vec<RowId>,
}

impl KnnModel {
    pub fn neighbors(&self, x: &[f64]) -> Vec<RowId> {
        k_nearest(
            x,
            &self.features,
            self.n_features,
            &self.row_ids,
            self.k,
            None,
        )
        .into_iter()
        .map(|n| n.id)
        .collect()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let nn = k_nearest(
            x,
            &self.features,
            self.n_features,
            &self.row_ids,
            self.k,
            None,
        );
        let frauds = nn.iter().filter(|n| self.labels[n.index] == 1).count();
        frauds as f64 / self.k as f64
    }
}

pub fn fit(ds: &Dataset, p: &KnnParams) -> Result<KnnModel> {
    p.validate()?;
    if p.k > ds.len() {
        return Err(Error::param(
            "k",
            format!("{} exceeds the {} training rows", p.k, ds.len()),
        ));
    }
    Ok(KnnModel {
        k: p.k,
        n_features: ds.n_features(),
        features: ds.features().to_vec(),
        labels: ds.labels().to_vec(),
        row_ids: ds.row_ids().to_vec(),
    })
}

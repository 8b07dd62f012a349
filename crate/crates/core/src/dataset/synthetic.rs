use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, RowId};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Parameters of the Gaussian-mixture generator used when the real
/// transaction file is not available.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_majority: usize,
    pub n_minority: usize,
    pub dimensions: usize,
    /// Distance between the two class means.
    pub class_separation: f64,
    #[serde(default = "default_clusters")]
    pub clusters_per_class: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_clusters() -> usize {
    1
}

impl SyntheticSpec {
    pub fn new(
        n_majority: usize,
        n_minority: usize,
        dimensions: usize,
        class_separation: f64,
        seed: u64,
    ) -> Self {
        SyntheticSpec {
            n_majority,
            n_minority,
            dimensions,
            class_separation,
            clusters_per_class: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_minority > self.n_majority {
            return Err(Error::param("n_minority", "must not exceed n_majority"));
        }
        if self.dimensions == 0 {
            return Err(Error::param("dimensions", "must be at least 1"));
        }
        if !(self.class_separation >= 0.0 && self.class_separation.is_finite()) {
            return Err(Error::param("class_separation", "must be finite and >= 0"));
        }
        if self.clusters_per_class == 0 {
            return Err(Error::param("clusters_per_class", "must be at least 1"));
        }
        Ok(())
    }
}

fn unit_vector(rng: &mut StreamRng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Draws a unit-variance Gaussian mixture.
///
/// The minority mean sits `class_separation` away from the majority mean
/// along a random direction. With more than one cluster per class, cluster
/// centres are scattered around their class mean at radius
/// `class_separation / 2`. Rows are shuffled and numbered `0..n`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let d = spec.dimensions;
    let sep = spec.class_separation;
    let mut rng = rng::stream_for(spec.seed, "synthetic");

    let axis = unit_vector(&mut rng, d);
    let mut centers: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
    for (class, list) in centers.iter_mut().enumerate() {
        for _ in 0..spec.clusters_per_class {
            let mut c: Vec<f64> = axis.iter().map(|a| a * sep * class as f64).collect();
            if spec.clusters_per_class > 1 {
                let jitter = unit_vector(&mut rng, d);
                for (ci, j) in c.iter_mut().zip(jitter) {
                    *ci += 0.5 * sep * j;
                }
            }
            list.push(c);
        }
    }

    let n = spec.n_majority + spec.n_minority;
    let mut labels: Vec<u8> = Vec::with_capacity(n);
    labels.extend(core::iter::repeat_n(0, spec.n_majority));
    labels.extend(core::iter::repeat_n(1, spec.n_minority));
    labels.shuffle(&mut rng);

    let mut features = Vec::with_capacity(n * d);
    let mut seen = [0usize; 2];
    for &y in &labels {
        let class = y as usize;
        let center = &centers[class][seen[class] % spec.clusters_per_class];
        seen[class] += 1;
        for &c in center {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.push(c + z);
        }
    }
    let names = (0..d).map(|i| format!("f{i}")).collect();
    let ids = (0..n as u64).map(RowId).collect();
    Dataset::new(names, features, labels, ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_contract() {
        let ds = generate_synthetic(&SyntheticSpec::new(1000, 10, 5, 4.0, 7)).unwrap();
        assert_eq!(ds.len(), 1010);
        assert_eq!(ds.fraud_count(), 10);
        assert_eq!(ds.n_features(), 5);
    }

    #[test]
    fn deterministic_bits() {
        let spec = SyntheticSpec {
            clusters_per_class: 3,
            ..SyntheticSpec::new(200, 20, 4, 2.0, 11)
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        let other = generate_synthetic(&SyntheticSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a.fingerprint().sha256, other.fingerprint().sha256);
    }

    #[test]
    fn separation_moves_the_minority_mean() {
        let ds = generate_synthetic(&SyntheticSpec::new(4000, 4000, 3, 5.0, 1)).unwrap();
        let mut means = [[0.0; 3]; 2];
        for (row, &y) in ds.rows().zip(ds.labels()) {
            for (m, v) in means[y as usize].iter_mut().zip(row) {
                *m += v / 4000.0;
            }
        }
        let dist2: f64 = (0..3)
            .map(|j| (means[0][j] - means[1][j]) * (means[0][j] - means[1][j]))
            .sum();
        assert!((libm::sqrt(dist2) - 5.0).abs() < 0.2, "{dist2}");
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(generate_synthetic(&SyntheticSpec::new(5, 6, 2, 1.0, 0)).is_err());
        assert!(generate_synthetic(&SyntheticSpec::new(5, 1, 0, 1.0, 0)).is_err());
        assert!(generate_synthetic(&SyntheticSpec::new(5, 1, 2, -1.0, 0)).is_err());
    }
}

//! Random forest: CART trees on bootstrap samples, each split searched over
//! a random subset of features, predictions averaged over trees.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{AddAssign, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::require_both_classes;
use super::tree::{presort, Criterion, Grower, Matrix, TreeNode};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Minimum (bootstrap-weighted) rows per leaf.
    pub min_leaf: usize,
    /// Features searched per split; `None` means `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
    /// Draw a bootstrap sample per tree. Turning it off trains every tree
    /// on the full data.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 12,
            min_leaf: 1,
            features_per_split: None,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::param("n_trees", "must be at least 1"));
        }
        if self.max_depth == 0 {
            return Err(Error::param("max_depth", "must be at least 1"));
        }
        if self.min_leaf == 0 {
            return Err(Error::param("min_leaf", "must be at least 1"));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::param("features_per_split", "must be at least 1"));
        }
        Ok(())
    }

    fn features_for(&self, d: usize) -> Result<usize> {
        match self.features_per_split {
            Some(f) if f > d => Err(Error::param(
                "features_per_split",
                format!("{f} exceeds the {d} available features"),
            )),
            Some(f) => Ok(f),
            None => Ok((libm::ceil(libm::sqrt(d as f64)) as usize).clamp(1, d)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub tree_seeds: Vec<u64>,
}

impl ForestModel {
    /// Mean of the trees' leaf probabilities.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        sum / self.trees.len() as f64
    }
}

/// Weighted class counts.
#[derive(Clone, Copy, Default, Debug)]
pub(crate) struct ClassWeights([f64; 2]);

impl AddAssign for ClassWeights {
    fn add_assign(&mut self, o: Self) {
        self.0[0] += o.0[0];
        self.0[1] += o.0[1];
    }
}

impl Sub for ClassWeights {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        ClassWeights([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

/// Gini impurity with bootstrap multiplicities as weights.
pub(crate) struct Gini<'a> {
    pub labels: &'a [u8],
    pub weights: &'a [f64],
    pub min_leaf: f64,
}

impl Criterion for Gini<'_> {
    type Stats = ClassWeights;

    fn stats(&self, s: u32) -> ClassWeights {
        let mut w = [0.0; 2];
        w[self.labels[s as usize] as usize] = self.weights[s as usize];
        ClassWeights(w)
    }

    fn splittable(&self, n: &ClassWeights) -> bool {
        n.0[0] > 0.0 && n.0[1] > 0.0 && n.0[0] + n.0[1] >= 2.0 * self.min_leaf
    }

    fn admissible(&self, l: &ClassWeights, r: &ClassWeights) -> bool {
        l.0[0] + l.0[1] >= self.min_leaf && r.0[0] + r.0[1] >= self.min_leaf
    }

    /// `-w * gini = (w0^2 + w1^2) / w - w`; the `-w` terms cancel in a gain.
    fn score(&self, s: &ClassWeights) -> f64 {
        let w = s.0[0] + s.0[1];
        if w == 0.0 {
            0.0
        } else {
            (s.0[0] * s.0[0] + s.0[1] * s.0[1]) / w
        }
    }

    fn leaf_value(&self, s: &ClassWeights) -> f64 {
        let w = s.0[0] + s.0[1];
        if w == 0.0 {
            0.0
        } else {
            s.0[1] / w
        }
    }

    fn min_gain(&self) -> f64 {
        1e-12
    }
}

/// Grows one Gini tree on `samples` with multiplicities `weights` (indexed
/// by dataset row), searching `features_per_split` random features per node.
pub(crate) fn grow_tree<R: Rng>(
    ds: &Dataset,
    samples: &[u32],
    weights: &[f64],
    max_depth: usize,
    min_leaf: usize,
    features_per_split: usize,
    rng: &mut R,
) -> TreeNode {
    let d = ds.n_features();
    let x = Matrix {
        values: ds.features(),
        dim: d,
    };
    let lists = presort(&x, samples);
    let gini = Gini {
        labels: ds.labels(),
        weights,
        min_leaf: min_leaf as f64,
    };
    let mut grower = Grower::new(x, &gini, max_depth);
    let mut pick = || {
        if features_per_split >= d {
            (0..d).collect()
        } else {
            let mut f = rand::seq::index::sample(rng, d, features_per_split).into_vec();
            f.sort_unstable();
            f
        }
    };
    grower.grow(lists, &mut pick)
}

/// A single CART classification tree on all rows and all features.
pub fn fit_cart_tree(ds: &Dataset, max_depth: usize, min_leaf: usize) -> Result<TreeNode> {
    require_both_classes(ds)?;
    let samples: Vec<u32> = (0..ds.len() as u32).collect();
    let weights = alloc::vec![1.0; ds.len()];
    let mut unused = rng::stream(0);
    Ok(grow_tree(
        ds,
        &samples,
        &weights,
        max_depth,
        min_leaf,
        ds.n_features(),
        &mut unused,
    ))
}

pub fn fit<E: Executor>(
    ds: &Dataset,
    p: &ForestParams,
    seed: u64,
    exec: &E,
) -> Result<ForestModel> {
    p.validate()?;
    require_both_classes(ds)?;
    let fps = p.features_for(ds.n_features())?;
    let n = ds.len();
    let tree_seeds: Vec<u64> = (0..p.n_trees)
        .map(|i| rng::derive_seed_keyed(seed, "forest-tree", i as u64))
        .collect();
    let trees = exec.map(p.n_trees, |i| {
        let mut rng = rng::stream(tree_seeds[i]);
        let mut weights = alloc::vec![0.0; n];
        if p.bootstrap {
            for _ in 0..n {
                weights[rng.random_range(0..n)] += 1.0;
            }
        } else {
            weights.iter_mut().for_each(|w| *w = 1.0);
        }
        let samples: Vec<u32> = (0..n as u32)
            .filter(|&s| weights[s as usize] > 0.0)
            .collect();
        grow_tree(
            ds,
            &samples,
            &weights,
            p.max_depth,
            p.min_leaf,
            fps,
            &mut rng,
        )
    });
    Ok(ForestModel { trees, tree_seeds })
}

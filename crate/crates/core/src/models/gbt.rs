//! Gradient-boosted trees for logistic loss with second-order (Newton) leaf
//! weights and L2-regularised split gain.
//!
//! For gradients `g = p - y` and hessians `h = p (1 - p)` summed over a node
//! (`G`, `H`), a leaf's weight is `-G / (H + lambda)` and a split gains
//! `0.5 * (G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda))`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{AddAssign, Sub};

use serde::{Deserialize, Serialize};

use super::tree::{presort, Criterion, Grower, Matrix, TreeNode};
use super::{require_both_classes, sigmoid, softplus};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda_l2: f64,
    pub min_child_weight: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_rounds: 100,
            learning_rate: 0.1,
            max_depth: 3,
            lambda_l2: 1.0,
            min_child_weight: 1.0,
        }
    }
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::param(
                "learning_rate",
                format!("{} is not in (0, 1]", self.learning_rate),
            ));
        }
        if self.max_depth == 0 {
            return Err(Error::param("max_depth", "must be at least 1"));
        }
        if !(self.lambda_l2 >= 0.0 && self.lambda_l2.is_finite()) {
            return Err(Error::param("lambda_l2", "must be finite and >= 0"));
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return Err(Error::param("min_child_weight", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    /// Log-odds of the training prevalence.
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<TreeNode>,
    /// Mean training log-loss before the first round and after each round.
    pub train_loss: Vec<f64>,
}

impl GbtModel {
    pub fn raw_score(&self, x: &[f64], rounds: usize) -> f64 {
        let sum: f64 = self.trees.iter().take(rounds).map(|t| t.predict(x)).sum();
        self.base_score + self.learning_rate * sum
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.raw_score(x, self.trees.len()))
    }

    /// Prediction of the ensemble truncated to its first `rounds` trees.
    pub fn predict_proba_staged(&self, x: &[f64], rounds: usize) -> f64 {
        sigmoid(self.raw_score(x, rounds))
    }
}

#[derive(Clone, Copy, Default, Debug)]
pub(crate) struct GradStats {
    g: f64,
    h: f64,
}

impl AddAssign for GradStats {
    fn add_assign(&mut self, o: Self) {
        self.g += o.g;
        self.h += o.h;
    }
}

impl Sub for GradStats {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        GradStats {
            g: self.g - o.g,
            h: self.h - o.h,
        }
    }
}

struct Newton<'a> {
    grad: &'a [f64],
    hess: &'a [f64],
    lambda: f64,
    min_child_weight: f64,
}

impl Criterion for Newton<'_> {
    type Stats = GradStats;

    fn stats(&self, s: u32) -> GradStats {
        GradStats {
            g: self.grad[s as usize],
            h: self.hess[s as usize],
        }
    }

    fn splittable(&self, _: &GradStats) -> bool {
        true
    }

    fn admissible(&self, l: &GradStats, r: &GradStats) -> bool {
        l.h >= self.min_child_weight && r.h >= self.min_child_weight
    }

    fn score(&self, s: &GradStats) -> f64 {
        let denom = s.h + self.lambda;
        if denom <= 0.0 {
            0.0
        } else {
            0.5 * s.g * s.g / denom
        }
    }

    fn leaf_value(&self, s: &GradStats) -> f64 {
        let denom = s.h + self.lambda;
        if denom <= 0.0 {
            0.0
        } else {
            -s.g / denom
        }
    }
}

fn mean_log_loss(scores: &[f64], labels: &[u8]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&z, &y)| softplus(z) - y as f64 * z)
        .sum();
    total / scores.len() as f64
}

pub fn fit(ds: &Dataset, p: &GbtParams) -> Result<GbtModel> {
    p.validate()?;
    require_both_classes(ds)?;
    let n = ds.len();
    let prevalence = ds.fraud_fraction();
    let base_score = libm::log(prevalence / (1.0 - prevalence));
    let labels = ds.labels();
    let x = Matrix {
        values: ds.features(),
        dim: ds.n_features(),
    };
    let samples: Vec<u32> = (0..n as u32).collect();
    let sorted = presort(&x, &samples);

    let mut scores = alloc::vec![base_score; n];
    let mut grad = alloc::vec![0.0; n];
    let mut hess = alloc::vec![0.0; n];
    let mut trees = Vec::with_capacity(p.n_rounds);
    let mut train_loss = Vec::with_capacity(p.n_rounds + 1);
    train_loss.push(mean_log_loss(&scores, labels));
    let all_features: Vec<usize> = (0..ds.n_features()).collect();

    for _ in 0..p.n_rounds {
        for i in 0..n {
            let prob = sigmoid(scores[i]);
            grad[i] = prob - labels[i] as f64;
            hess[i] = prob * (1.0 - prob);
        }
        let newton = Newton {
            grad: &grad,
            hess: &hess,
            lambda: p.lambda_l2,
            min_child_weight: p.min_child_weight,
        };
        let mut grower = Grower::new(
            Matrix {
                values: ds.features(),
                dim: ds.n_features(),
            },
            &newton,
            p.max_depth,
        );
        let tree = grower.grow(sorted.clone(), &mut || all_features.clone());
        for (i, s) in scores.iter_mut().enumerate() {
            *s += p.learning_rate * tree.predict(ds.row(i));
        }
        trees.push(tree);
        train_loss.push(mean_log_loss(&scores, labels));
    }
    Ok(GbtModel {
        base_score,
        learning_rate: p.learning_rate,
        trees,
        train_loss,
    })
}

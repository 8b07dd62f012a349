//! Feed-forward network: ReLU hidden layers, one sigmoid output unit,
//! binary cross-entropy, mini-batch Adam.
//!
//! Parameters live in one flat vector, layer by layer: the `out x in`
//! weight matrix (row-major) followed by the `out` biases.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{require_both_classes, sigmoid, softplus};
use crate::dataset::{stratified_split, Dataset};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    /// Stratified share of the training rows held out to monitor loss.
    pub val_fraction: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: alloc::vec![32, 16],
            epochs: 15,
            batch_size: 256,
            val_fraction: 0.15,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl MlpParams {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::param(
                "hidden",
                "needs at least one layer and no empty layer",
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::param(
                "val_fraction",
                format!("{} is not in [0, 1)", self.val_fraction),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param("learning_rate", "must be finite and > 0"));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::param("beta1/beta2", "must be in [0, 1)"));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::param("epsilon", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// Layer widths from input to output, e.g. `[30, 32, 16, 1]`.
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
    pub history: Vec<EpochLoss>,
}

/// Offsets of one layer's weights and biases in the flat parameter vector.
#[derive(Clone, Copy)]
struct Layer {
    inputs: usize,
    outputs: usize,
    weights: usize,
    biases: usize,
}

fn layout(sizes: &[usize]) -> Vec<Layer> {
    let mut offset = 0;
    sizes
        .windows(2)
        .map(|w| {
            let l = Layer {
                inputs: w[0],
                outputs: w[1],
                weights: offset,
                biases: offset + w[0] * w[1],
            };
            offset = l.biases + w[1];
            l
        })
        .collect()
}

/// Per-sample activations kept for the backward pass.
struct Workspace {
    activations: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(sizes: &[usize]) -> Self {
        Workspace {
            activations: sizes.iter().map(|&s| alloc::vec![0.0; s]).collect(),
            deltas: sizes.iter().map(|&s| alloc::vec![0.0; s]).collect(),
        }
    }
}

impl MlpModel {
    /// He-initialised network (normal, variance `2 / fan_in`), zero biases.
    pub fn init(sizes: Vec<usize>, seed: u64) -> MlpModel {
        let layers = layout(&sizes);
        let total = layers.last().map_or(0, |l| l.biases + l.outputs);
        let mut params = alloc::vec![0.0; total];
        let mut rng = rng::stream_for(seed, "mlp-init");
        for l in &layers {
            let normal = Normal::new(0.0, libm::sqrt(2.0 / l.inputs as f64)).expect("positive std");
            for w in &mut params[l.weights..l.biases] {
                *w = normal.sample(&mut rng);
            }
        }
        MlpModel {
            sizes,
            params,
            history: Vec::new(),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    fn forward(&self, x: &[f64], ws: &mut Workspace) -> f64 {
        let layers = layout(&self.sizes);
        ws.activations[0].copy_from_slice(x);
        let last = layers.len() - 1;
        for (li, l) in layers.iter().enumerate() {
            let (before, after) = ws.activations.split_at_mut(li + 1);
            let input = &before[li];
            let output = &mut after[0];
            for (o, out) in output.iter_mut().enumerate() {
                let row = &self.params[l.weights + o * l.inputs..l.weights + (o + 1) * l.inputs];
                let z = self.params[l.biases + o]
                    + row.iter().zip(input).map(|(w, a)| w * a).sum::<f64>();
                *out = if li == last { z } else { z.max(0.0) };
            }
        }
        ws.activations[self.sizes.len() - 1][0]
    }

    /// Output-layer logit.
    pub fn logit(&self, x: &[f64]) -> f64 {
        let mut ws = Workspace::new(&self.sizes);
        self.forward(x, &mut ws)
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Mean binary cross-entropy over `rows`.
    pub fn loss(&self, ds: &Dataset, rows: &[usize]) -> f64 {
        let mut ws = Workspace::new(&self.sizes);
        let total: f64 = rows
            .iter()
            .map(|&i| {
                let z = self.forward(ds.row(i), &mut ws);
                softplus(z) - ds.label(i) as f64 * z
            })
            .sum();
        total / rows.len() as f64
    }

    /// Mean binary cross-entropy over `rows` and its gradient with respect
    /// to every parameter, by backpropagation.
    pub fn loss_and_gradient(&self, ds: &Dataset, rows: &[usize]) -> (f64, Vec<f64>) {
        let mut grad = alloc::vec![0.0; self.params.len()];
        let mut ws = Workspace::new(&self.sizes);
        let loss = self.accumulate(ds, rows, &mut ws, &mut grad);
        (loss, grad)
    }

    fn accumulate(
        &self,
        ds: &Dataset,
        rows: &[usize],
        ws: &mut Workspace,
        grad: &mut [f64],
    ) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let layers = layout(&self.sizes);
        let scale = 1.0 / rows.len() as f64;
        let mut loss = 0.0;
        for &i in rows {
            let y = ds.label(i) as f64;
            let z = self.forward(ds.row(i), ws);
            loss += softplus(z) - y * z;
            let top = self.sizes.len() - 1;
            ws.deltas[top][0] = (sigmoid(z) - y) * scale;
            for li in (0..layers.len()).rev() {
                let l = layers[li];
                let (lower, upper) = ws.deltas.split_at_mut(li + 1);
                let delta = &upper[0];
                let input = &ws.activations[li];
                for o in 0..l.outputs {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    let row = l.weights + o * l.inputs;
                    for (g, a) in grad[row..row + l.inputs].iter_mut().zip(input) {
                        *g += d * a;
                    }
                    grad[l.biases + o] += d;
                }
                if li > 0 {
                    let below = &mut lower[li];
                    for (j, b) in below.iter_mut().enumerate() {
                        // ReLU derivative: the unit was active iff its output is positive.
                        if input[j] <= 0.0 {
                            *b = 0.0;
                            continue;
                        }
                        let mut s = 0.0;
                        for (o, d) in delta.iter().enumerate() {
                            s += self.params[l.weights + o * l.inputs + j] * d;
                        }
                        *b = s;
                    }
                }
            }
        }
        loss * scale
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn step(&mut self, params: &mut [f64], grad: &[f64], p: &MlpParams) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(p.beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(p.beta2, self.t as f64);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = p.beta1 * self.m[i] + (1.0 - p.beta1) * g;
            self.v[i] = p.beta2 * self.v[i] + (1.0 - p.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= p.learning_rate * m_hat / (libm::sqrt(v_hat) + p.epsilon);
        }
    }
}

pub fn fit(ds: &Dataset, p: &MlpParams, seed: u64) -> Result<MlpModel> {
    p.validate()?;
    require_both_classes(ds)?;
    let (train, val) = if p.val_fraction > 0.0 {
        let (t, v) =
            stratified_split(ds, p.val_fraction, rng::derive_seed(seed, "mlp-validation"))?;
        (t, Some(v))
    } else {
        (ds.clone(), None)
    };
    if p.batch_size > train.len() {
        return Err(Error::Precondition(format!(
            "batch_size {} exceeds the {} training rows left after the validation split",
            p.batch_size,
            train.len()
        )));
    }

    let mut sizes = Vec::with_capacity(p.hidden.len() + 2);
    sizes.push(ds.n_features());
    sizes.extend_from_slice(&p.hidden);
    sizes.push(1);
    let mut model = MlpModel::init(sizes, seed);
    let mut adam = Adam {
        m: alloc::vec![0.0; model.params.len()],
        v: alloc::vec![0.0; model.params.len()],
        t: 0,
    };
    let mut grad = alloc::vec![0.0; model.params.len()];
    let mut ws = Workspace::new(&model.sizes);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let val_rows: Vec<usize> = val
        .as_ref()
        .map(|v| (0..v.len()).collect())
        .unwrap_or_default();
    let mut shuffle_rng = rng::stream_for(seed, "mlp-shuffle");

    for epoch in 0..p.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(p.batch_size).enumerate() {
            let loss = model.accumulate(&train, batch, &mut ws, &mut grad);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged(format!(
                    "non-finite loss at epoch {}, batch {}",
                    epoch + 1,
                    b + 1
                )));
            }
            epoch_loss += loss * batch.len() as f64;
            adam.step(&mut model.params, &grad, p);
        }
        let val_loss = val.as_ref().map(|v| model.loss(v, &val_rows));
        model.history.push(EpochLoss {
            epoch: epoch + 1,
            train_loss: epoch_loss / train.len() as f64,
            val_loss,
        });
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticSpec};

    #[test]
    fn zero_epochs_returns_initial_network() {
        let ds = generate_synthetic(&SyntheticSpec::new(80, 20, 3, 2.0, 1)).unwrap();
        let p = MlpParams {
            epochs: 0,
            batch_size: 8,
            ..MlpParams::default()
        };
        let m = fit(&ds, &p, 4).unwrap();
        assert!(m.history.is_empty());
        assert_eq!(
            m.params,
            MlpModel::init(alloc::vec![3, 32, 16, 1], 4).params
        );
        assert_eq!(m.parameter_count(), 3 * 32 + 32 + 32 * 16 + 16 + 16 + 1);
    }

    #[test]
    fn batch_larger_than_training_rows_is_rejected() {
        let ds = generate_synthetic(&SyntheticSpec::new(80, 20, 3, 2.0, 1)).unwrap();
        assert!(matches!(
            fit(&ds, &MlpParams::default(), 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn history_has_one_entry_per_epoch() {
        let ds = generate_synthetic(&SyntheticSpec::new(300, 100, 2, 3.0, 1)).unwrap();
        let p = MlpParams {
            epochs: 4,
            batch_size: 32,
            ..MlpParams::default()
        };
        let m = fit(&ds, &p, 2).unwrap();
        assert_eq!(m.history.len(), 4);
        assert!(m
            .history
            .iter()
            .all(|h| h.val_loss.is_some() && h.train_loss.is_finite()));
        assert!(m.history[3].train_loss < m.history[0].train_loss);
    }
}

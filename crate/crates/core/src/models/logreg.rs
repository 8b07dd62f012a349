//! Logistic regression fitted by full-batch gradient descent on the mean
//! log-loss plus `l2 / 2 * |beta|^2` (intercept not penalised).

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{require_both_classes, sigmoid, softplus};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogRegParams {
    pub l2: f64,
    pub max_iters: usize,
    /// Stop when the gradient's infinity norm drops to this.
    pub tol: f64,
    /// Initial step size.
    pub learning_rate: f64,
    /// Armijo backtracking on each step; otherwise the step stays fixed.
    pub backtracking: bool,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            l2: 1e-4,
            max_iters: 2000,
            tol: 1e-6,
            learning_rate: 1.0,
            backtracking: true,
        }
    }
}

impl LogRegParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::param("l2", "must be finite and >= 0"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::param("tol", "must be > 0"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param(
                "learning_rate",
                format!("{} must be finite and > 0", self.learning_rate),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Whether the gradient tolerance was reached within `max_iters`.
    pub converged: bool,
    pub iterations: usize,
    /// Infinity norm of the gradient at the returned parameters.
    pub gradient_norm: f64,
}

impl LogRegModel {
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.intercept + dot(&self.coefficients, x))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Objective value at `(coefficients, intercept)`.
pub fn objective(ds: &Dataset, coefficients: &[f64], intercept: f64, l2: f64) -> f64 {
    let n = ds.len() as f64;
    let data: f64 = ds
        .rows()
        .zip(ds.labels())
        .map(|(x, &y)| {
            let z = intercept + dot(coefficients, x);
            softplus(z) - y as f64 * z
        })
        .sum();
    data / n + 0.5 * l2 * dot(coefficients, coefficients)
}

/// Objective value and gradient; the last gradient entry is the intercept's.
pub fn objective_and_gradient(
    ds: &Dataset,
    coefficients: &[f64],
    intercept: f64,
    l2: f64,
) -> (f64, Vec<f64>) {
    let d = coefficients.len();
    let n = ds.len() as f64;
    let mut grad = alloc::vec![0.0; d + 1];
    let mut loss = 0.0;
    for (x, &y) in ds.rows().zip(ds.labels()) {
        let z = intercept + dot(coefficients, x);
        loss += softplus(z) - y as f64 * z;
        let r = sigmoid(z) - y as f64;
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += r * xi;
        }
        grad[d] += r;
    }
    for g in &mut grad {
        *g /= n;
    }
    for (g, b) in grad.iter_mut().zip(coefficients) {
        *g += l2 * b;
    }
    (loss / n + 0.5 * l2 * dot(coefficients, coefficients), grad)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter()
        .fold(0.0, |m, x| if x.abs() > m { x.abs() } else { m })
}

pub fn fit(ds: &Dataset, p: &LogRegParams) -> Result<LogRegModel> {
    p.validate()?;
    require_both_classes(ds)?;
    let d = ds.n_features();
    let mut beta = alloc::vec![0.0; d];
    let mut intercept = 0.0;
    let mut step = p.learning_rate;
    let (mut loss, mut grad) = objective_and_gradient(ds, &beta, intercept, p.l2);
    let mut iterations = 0;
    let mut converged = inf_norm(&grad) <= p.tol;

    while !converged && iterations < p.max_iters {
        iterations += 1;
        let sq: f64 = grad.iter().map(|g| g * g).sum();
        let mut candidate = beta.clone();
        let mut candidate_intercept;
        loop {
            for (c, (b, g)) in candidate.iter_mut().zip(beta.iter().zip(&grad)) {
                *c = b - step * g;
            }
            candidate_intercept = intercept - step * grad[d];
            if !p.backtracking {
                break;
            }
            let trial = objective(ds, &candidate, candidate_intercept, p.l2);
            if trial <= loss - 1e-4 * step * sq {
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
        if step < 1e-14 {
            // No descent possible at machine precision.
            break;
        }
        beta = candidate;
        intercept = candidate_intercept;
        (loss, grad) = objective_and_gradient(ds, &beta, intercept, p.l2);
        if !loss.is_finite() {
            return Err(Error::Diverged(format!(
                "logistic loss became non-finite at iteration {iterations}"
            )));
        }
        converged = inf_norm(&grad) <= p.tol;
        if p.backtracking {
            step *= 1.5;
        }
    }
    Ok(LogRegModel {
        coefficients: beta,
        intercept,
        converged,
        iterations,
        gradient_norm: inf_norm(&grad),
    })
}

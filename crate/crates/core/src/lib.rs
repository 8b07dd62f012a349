//! Resampling, classifiers and evaluation metrics for heavily imbalanced
//! binary classification problems such as card-fraud detection.
//!
//! The crate is `no_std` and only needs an allocator. Everything that touches
//! the filesystem, threads or the command line lives in the companion
//! `fraudlab` crate.
//!
//! The pieces, bottom-up:
//!
//! * [`dataset`]: the labeled feature matrix, robust scaling, stratified and
//!   random splits, and a seeded Gaussian-mixture generator.
//! * [`resampling`]: random undersampling, SMOTE, the SMOTE + undersampling
//!   hybrid and the fraud-ratio sweep built on it.
//! * [`models`]: logistic regression, random forest, gradient-boosted trees,
//!   k-nearest neighbours and a small multilayer perceptron behind one
//!   fit / predict-probability contract.
//! * [`metrics`]: confusion matrices, per-class precision / recall / F1 /
//!   accuracy and the evaluation report.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod models;
pub mod neighbors;
pub mod resampling;
pub mod rng;

pub use dataset::{Dataset, RowId, ScalerParams, SyntheticSpec};
pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use metrics::{ClassReport, ConfusionMatrix, EvalReport};
pub use models::{ModelSpec, TrainedModel};
pub use resampling::ResamplePlan;

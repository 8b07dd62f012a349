//! File formats, experiment orchestration, reports and the command-line
//! front end for [`fraudlab_core`].

#![forbid(unsafe_code)]

pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod io;
pub mod report;

pub use error::{Error, Result};
pub use exec::RayonExecutor;

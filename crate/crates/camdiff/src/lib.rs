//! Dataset-level tooling on top of `camdiff-core`: HTTP model backends, the
//! parallel synthesis pipeline with its JSON-lines manifest, metric
//! evaluation over prediction directories, and the `camdiff` command line.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod http;
pub mod inspect;
pub mod labels;

pub use error::{PipelineError, Result};

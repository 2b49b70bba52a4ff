//! Files, experiment pipeline and command-line tool around [`numur_core`].
//!
//! The core crate holds the models and algorithms; this crate reads and
//! writes corpora, removal requests and model weights, runs the pipeline
//! steps (`gen`, `train`, `retrain`, `partition`, `unlearn`, `eval`,
//! `report`) and renders reports.

pub mod charts;
pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod output;
pub mod pipeline;

pub use numur_core as core;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use pipeline::{Target, UnlearnRequest, Workspace};

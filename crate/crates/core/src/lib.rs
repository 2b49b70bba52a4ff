//! Learning-to-rank model, corpus partitioning and machine unlearning
//! strategies for removing queries or documents from a trained ranker.
//!
//! The crate is `no_std` (with `alloc`). Wall-clock time and file formats
//! live in the `numur` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod engine;
pub mod error;
pub mod eval;
pub mod losses;
pub mod partition;
pub mod ranker;
pub mod synthetic;
pub mod trace;

#[cfg(test)]
mod testing;

pub use corpus::{CorpusSplit, Dataset, DatasetBuilder, DocIdx, Label, QueryIdx, Sample};
pub use engine::{
    compute_destinations, unlearn, Ablation, Destination, Destinations, EpochRecord, Method, MethodParams,
    UnlearnConfig, UnlearnRun, UnlearnTask,
};
pub use error::{Error, Result};
pub use eval::{evaluate_sets, mrr_forget, mrr_set, MetricsReport, MrrOutcome};
pub use partition::{partition, sample_forget_spec, ForgetSpec, Partition, RemovalKind};
pub use ranker::{retrain, train, ScoreModel, TrainConfig, Trained};
pub use synthetic::{generate_synthetic, SyntheticConfig};
pub use trace::{Observer, Phase, Silent};

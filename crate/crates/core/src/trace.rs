//! Hooks for timing and instrumentation of training and unlearning loops.
//!
//! The core has no clock of its own; callers that want wall-time
//! trajectories pass an [`Observer`] that reads one.

use crate::corpus::{DocIdx, QueryIdx};

/// Where a gradient originated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    /// Pairwise training or continued training.
    Train,
    /// Forget-side updates (contrastive loss, ascent, swapped labels, bad teacher).
    Forget,
    /// Entangled partner term of the contrastive loss.
    Entangled,
    /// Retain-side updates (consistent loss, competent teacher).
    Retain,
}

pub trait Observer {
    /// Monotone seconds. Only differences are used.
    fn now(&self) -> f64 {
        0.0
    }

    /// Called once per (query, document) pair that contributes a gradient step.
    fn touched(&mut self, _phase: Phase, _query: QueryIdx, _doc: DocIdx) {}
}

/// Observer that records nothing and reports zero time.
#[derive(Clone, Copy, Debug, Default)]
pub struct Silent;

impl Observer for Silent {}

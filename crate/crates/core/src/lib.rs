//! Robust influence maximization under the independent cascade model.
//!
//! The crate computes seed sets that hold up when edge probabilities are only
//! known up to intervals (`lugreedy`), certifies them with the gap ratio
//! `α(Θ)`, and narrows the intervals by sampling edges of a hidden ground truth.

pub mod error;
pub mod graph;
pub mod harness;
pub mod maximize;
pub mod robust;
pub mod sampling;
pub mod spread;
pub mod stream;

pub use error::{Error, Result};

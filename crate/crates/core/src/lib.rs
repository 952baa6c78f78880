//! Predicting team performance from communication transcripts.
//!
//! The pipeline runs preprocessing ([`corpus`]), topic modelling with a
//! collapsed Gibbs sampler ([`topics`]), k-means with gap-statistic selection
//! over topic proportions ([`clustering`]), regression diagnostics
//! ([`stats`]), prefix-based cluster prediction ([`earlypred`]) and a
//! checkpointed intervention policy ([`intervention`]). [`synth`] produces
//! data with known ground truth for testing every stage.

pub mod clustering;
pub mod corpus;
pub mod earlypred;
pub mod error;
pub mod intervention;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod topics;

pub use error::{Error, Result};

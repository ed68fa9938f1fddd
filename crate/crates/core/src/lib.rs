//! Truth inference for crowdsourced annotations.
//!
//! Aggregators for categorical, pairwise, sequence and segmentation responses,
//! annotation-quality estimators, evaluation metrics, seeded synthetic
//! generators, and a benchmark grid runner.

pub mod bench;
pub mod categorical;
pub mod data;
pub mod error;
pub mod methods;
pub mod metrics;
pub mod pairwise;
pub mod quality;
pub mod segmentation;
pub mod sequence;
pub mod synth;
pub mod util;

pub use error::{Error, Result};

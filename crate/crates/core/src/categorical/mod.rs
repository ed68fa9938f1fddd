//! Categorical truth inference: one latent true label per task.
//!
//! Every aggregator takes an [`AnnotationTable`] and returns a
//! [`CategoricalResult`]. Ties between labels always go to the
//! lexicographically smallest label.

mod dawid_skene;
pub mod glad;
mod kos;
mod mace;
mod majority;
mod mmsr;
mod wawa;

pub use dawid_skene::{dawid_skene, dawid_skene_model, ConfusionModel};
pub use glad::glad;
pub use kos::kos;
pub use mace::mace;
pub use majority::majority_vote;
pub use mmsr::{mmsr, mmsr_with_init};
pub use wawa::wawa;

use crate::data::AnnotationTable;
use crate::util::argmax;

/// Shared knobs of the iterative categorical methods.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalParams {
    pub n_iter: usize,
    pub tol: f64,
    pub seed: u64,
    /// Pseudo-count added to every confusion / spam cell.
    pub smoothing: f64,
}

impl Default for CategoricalParams {
    fn default() -> Self {
        Self {
            n_iter: 100,
            tol: 1e-6,
            seed: 0,
            smoothing: 0.01,
        }
    }
}

impl CategoricalParams {
    pub fn with_n_iter(mut self, n_iter: usize) -> Self {
        self.n_iter = n_iter;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_smoothing(mut self, smoothing: f64) -> Self {
        self.smoothing = smoothing;
        self
    }
}

/// Per-task label mass of a weighted vote.
pub(crate) fn weighted_votes(table: &AnnotationTable, weights: &[f64]) -> Vec<Vec<f64>> {
    (0..table.n_tasks())
        .map(|t| {
            let mut mass = vec![0.0; table.n_labels()];
            for r in table.task_responses(t) {
                mass[r.label] += weights[r.worker];
            }
            mass
        })
        .collect()
}

pub(crate) fn argmax_rows(rows: &[Vec<f64>]) -> Vec<usize> {
    rows.iter().map(|r| argmax(r)).collect()
}

pub(crate) fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

//! Item scores from pairwise comparisons.

mod bradley_terry;
pub mod noisy_bt;

use std::collections::BTreeMap;

use rand::Rng;

pub use bradley_terry::bradley_terry;
pub use noisy_bt::noisy_bt;

use crate::data::{PairwiseTable, Trace};
use crate::util::{derive_seed, rng};

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseParams {
    pub n_iter: usize,
    pub tol: f64,
    pub seed: u64,
    /// noisyBT step size.
    pub lr: f64,
    /// noisyBT ridge penalty on item scores and worker biases.
    pub l2: f64,
}

impl Default for PairwiseParams {
    fn default() -> Self {
        Self {
            n_iter: 200,
            tol: 1e-8,
            seed: 0,
            lr: 0.1,
            l2: 1e-3,
        }
    }
}

/// Reliability `q_w` and left-position bias `b_w` of one worker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkerParams {
    pub reliability: f64,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreResult {
    pub scores: BTreeMap<String, f64>,
    /// Items by descending score; equal scores in item-id order.
    pub ranking: Vec<String>,
    pub worker_params: Option<BTreeMap<String, WorkerParams>>,
    pub trace: Trace,
}

impl ScoreResult {
    pub(crate) fn new(
        items: &[String],
        scores: &[f64],
        worker_params: Option<BTreeMap<String, WorkerParams>>,
        trace: Trace,
    ) -> Self {
        let mut order: Vec<usize> = (0..items.len()).collect();
        // items are sorted, so a stable sort keeps id order among ties
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        Self {
            scores: items.iter().cloned().zip(scores.iter().copied()).collect(),
            ranking: order.into_iter().map(|i| items[i].clone()).collect(),
            worker_params,
            trace,
        }
    }
}

/// I.i.d. uniform scores: the chance-level control for rank correlation.
pub fn random_baseline(table: &PairwiseTable, seed: u64) -> ScoreResult {
    let mut rng = rng(derive_seed(seed, &["random-baseline"]));
    let scores: Vec<f64> = table.items().iter().map(|_| rng.random()).collect();
    ScoreResult::new(table.items(), &scores, None, Trace::default())
}

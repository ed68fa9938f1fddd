//! Bradley–Terry with unreliable, position-biased workers.
//!
//! A worker with reliability `q = σ(r)` judges by the items' scores and
//! otherwise picks the left item with probability `σ(b)`:
//! `P(left wins) = q σ(s_l − s_r) + (1 − q) σ(b)`.

use rand_distr::{Distribution, Normal};

use super::{PairwiseParams, ScoreResult, WorkerParams};
use crate::data::{PairwiseTable, Trace};
use crate::error::{Error, Result};
use crate::util::{derive_seed, rng, sigmoid};

/// Free parameters: item scores, worker reliability logits, worker biases.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub scores: Vec<f64>,
    pub reliability_logit: Vec<f64>,
    pub bias: Vec<f64>,
}

impl State {
    pub fn initial(table: &PairwiseTable, seed: u64) -> Self {
        let mut rng = rng(derive_seed(seed, &["noisy-bt"]));
        let normal = Normal::new(0.0, 0.01).unwrap();
        Self {
            scores: table.items().iter().map(|_| normal.sample(&mut rng)).collect(),
            reliability_logit: vec![1.0; table.workers().len()],
            bias: vec![0.0; table.workers().len()],
        }
    }
}

/// Penalized log-likelihood.
pub fn objective(table: &PairwiseTable, state: &State, l2: f64) -> f64 {
    let ll: f64 = table
        .comparisons()
        .iter()
        .map(|c| {
            let y = if c.left_won { 1.0 } else { -1.0 };
            let q = sigmoid(state.reliability_logit[c.worker]);
            let d = y * (state.scores[c.left] - state.scores[c.right]);
            (q * sigmoid(d) + (1.0 - q) * sigmoid(y * state.bias[c.worker])).ln()
        })
        .sum();
    let ridge: f64 = state.scores.iter().chain(&state.bias).map(|v| v * v).sum();
    ll - l2 * ridge
}

/// Gradient of [`objective`] in the layout of [`State`].
pub fn gradient(table: &PairwiseTable, state: &State, l2: f64) -> State {
    let mut g = State {
        scores: state.scores.iter().map(|s| -2.0 * l2 * s).collect(),
        reliability_logit: vec![0.0; state.reliability_logit.len()],
        bias: state.bias.iter().map(|b| -2.0 * l2 * b).collect(),
    };
    for c in table.comparisons() {
        let y = if c.left_won { 1.0 } else { -1.0 };
        let q = sigmoid(state.reliability_logit[c.worker]);
        let judged = sigmoid(y * (state.scores[c.left] - state.scores[c.right]));
        let guessed = sigmoid(y * state.bias[c.worker]);
        let p = q * judged + (1.0 - q) * guessed;
        let d_score = q * judged * (1.0 - judged) * y / p;
        g.scores[c.left] += d_score;
        g.scores[c.right] -= d_score;
        g.reliability_logit[c.worker] += q * (1.0 - q) * (judged - guessed) / p;
        g.bias[c.worker] += (1.0 - q) * guessed * (1.0 - guessed) * y / p;
    }
    g
}

/// Full-batch gradient ascent on [`objective`]. Each coordinate's step is divided
/// by the number of comparisons it appears in.
pub fn noisy_bt(table: &PairwiseTable, params: &PairwiseParams) -> Result<ScoreResult> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut item_counts = vec![0.0; table.items().len()];
    let mut worker_counts = vec![0.0; table.workers().len()];
    for c in table.comparisons() {
        item_counts[c.left] += 1.0;
        item_counts[c.right] += 1.0;
        worker_counts[c.worker] += 1.0;
    }
    let mut state = State::initial(table, params.seed);
    let mut trace = Trace {
        log_likelihood: Some(vec![]),
        ..Trace::default()
    };
    for iteration in 1..=params.n_iter {
        let g = gradient(table, &state, params.l2);
        let mut delta: f64 = 0.0;
        let mut step = |values: &mut [f64], grads: &[f64], counts: &[f64]| {
            for ((v, g), n) in values.iter_mut().zip(grads).zip(counts) {
                let s = params.lr * g / n;
                delta = delta.max(s.abs());
                *v += s;
            }
        };
        step(&mut state.scores, &g.scores, &item_counts);
        step(&mut state.reliability_logit, &g.reliability_logit, &worker_counts);
        step(&mut state.bias, &g.bias, &worker_counts);
        trace.iterations_run = iteration;
        trace.final_delta = delta;
        trace
            .log_likelihood
            .as_mut()
            .unwrap()
            .push(objective(table, &state, params.l2));
        if delta < params.tol {
            break;
        }
    }
    let worker_params = table
        .workers()
        .iter()
        .enumerate()
        .map(|(w, name)| {
            (
                name.clone(),
                WorkerParams {
                    reliability: sigmoid(state.reliability_logit[w]),
                    bias: state.bias[w],
                },
            )
        })
        .collect();
    Ok(ScoreResult::new(
        table.items(),
        &state.scores,
        Some(worker_params),
        trace,
    ))
}

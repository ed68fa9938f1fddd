//! GLAD: worker ability times task easiness.
//!
//! A worker answers task `t` correctly with probability `σ(α_w · e^{b_t})`; the
//! remaining mass is spread evenly over the wrong labels. The M-step objective
//! and its gradient are public so that callers can check one against the other.

use super::{argmax_rows, max_abs_diff, CategoricalParams};
use crate::data::{AnnotationTable, CategoricalResult, Trace};
use crate::util::{log_sigmoid, normalize_log, sigmoid};

/// Worker abilities `α` and log-easiness `b` (so `β = e^b > 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct GladParams {
    pub alpha: Vec<f64>,
    pub log_beta: Vec<f64>,
}

impl GladParams {
    pub fn initial(table: &AnnotationTable) -> Self {
        Self {
            alpha: vec![1.0; table.n_workers()],
            log_beta: vec![0.0; table.n_tasks()],
        }
    }
}

/// Posterior over true labels under a uniform prior, plus the observed log-likelihood.
pub fn e_step(table: &AnnotationTable, params: &GladParams) -> (Vec<Vec<f64>>, f64) {
    let k = table.n_labels();
    let log_wrong_share = ((k.max(2) - 1) as f64).ln();
    let log_prior = -(k as f64).ln();
    let mut log_likelihood = 0.0;
    let posteriors = (0..table.n_tasks())
        .map(|t| {
            let mut logp = vec![log_prior; k];
            let beta = params.log_beta[t].exp();
            for r in table.task_responses(t) {
                let x = params.alpha[r.worker] * beta;
                let right = log_sigmoid(x);
                let wrong = log_sigmoid(-x) - log_wrong_share;
                for (c, v) in logp.iter_mut().enumerate() {
                    *v += if c == r.label { right } else { wrong };
                }
            }
            log_likelihood += normalize_log(&mut logp);
            logp
        })
        .collect();
    (posteriors, log_likelihood)
}

/// Expected complete-data log-likelihood `Q(α, b)` under fixed posteriors.
pub fn objective(table: &AnnotationTable, posteriors: &[Vec<f64>], params: &GladParams) -> f64 {
    let log_wrong_share = ((table.n_labels().max(2) - 1) as f64).ln();
    table
        .responses()
        .iter()
        .map(|r| {
            let q = posteriors[r.task][r.label];
            let x = params.alpha[r.worker] * params.log_beta[r.task].exp();
            let wrong = 1.0 - q;
            q * log_sigmoid(x)
                + if wrong == 0.0 {
                    0.0
                } else {
                    wrong * (log_sigmoid(-x) - log_wrong_share)
                }
        })
        .sum()
}

/// `(∂Q/∂α, ∂Q/∂b)`.
pub fn gradient(
    table: &AnnotationTable,
    posteriors: &[Vec<f64>],
    params: &GladParams,
) -> (Vec<f64>, Vec<f64>) {
    let mut d_alpha = vec![0.0; table.n_workers()];
    let mut d_log_beta = vec![0.0; table.n_tasks()];
    for r in table.responses() {
        let beta = params.log_beta[r.task].exp();
        let alpha = params.alpha[r.worker];
        // dQ/dx = q - σ(x) with x = α β
        let g = posteriors[r.task][r.label] - sigmoid(alpha * beta);
        d_alpha[r.worker] += g * beta;
        d_log_beta[r.task] += g * alpha * beta;
    }
    (d_alpha, d_log_beta)
}

/// Fixed-budget ascent on `Q`. Each coordinate's step is divided by a bound on
/// its curvature (`σ(1 − σ) ≤ 1/4`, `|q − σ| ≤ 1`), which keeps the fixed step
/// from overshooting once abilities grow large.
fn m_step(
    table: &AnnotationTable,
    posteriors: &[Vec<f64>],
    params: &mut GladParams,
    grad_steps: usize,
    lr: f64,
) {
    for _ in 0..grad_steps {
        let (d_alpha, d_log_beta) = gradient(table, posteriors, params);
        let mut scale_alpha = vec![CURVATURE_FLOOR; table.n_workers()];
        let mut scale_beta = vec![CURVATURE_FLOOR; table.n_tasks()];
        for r in table.responses() {
            let beta = params.log_beta[r.task].exp();
            let x = params.alpha[r.worker] * beta;
            scale_alpha[r.worker] += beta * beta;
            scale_beta[r.task] += x * x + x.abs();
        }
        for ((a, g), s) in params.alpha.iter_mut().zip(&d_alpha).zip(&scale_alpha) {
            *a += lr * g / s;
        }
        for ((b, g), s) in params.log_beta.iter_mut().zip(&d_log_beta).zip(&scale_beta) {
            *b += lr * g / s;
        }
    }
}

const CURVATURE_FLOOR: f64 = 1e-3;

/// GLAD EM. Skills are the learned abilities `α`.
pub fn glad(
    table: &AnnotationTable,
    params: &CategoricalParams,
    grad_steps: usize,
    lr: f64,
) -> CategoricalResult {
    let mut model = GladParams::initial(table);
    let (mut posteriors, _) = e_step(table, &model);
    let mut trace = Trace {
        log_likelihood: Some(vec![]),
        ..Trace::default()
    };
    for iteration in 1..=params.n_iter {
        m_step(table, &posteriors, &mut model, grad_steps, lr);
        let (next, ll) = e_step(table, &model);
        trace.final_delta = max_abs_diff(&next, &posteriors);
        trace.iterations_run = iteration;
        trace.log_likelihood.as_mut().unwrap().push(ll);
        posteriors = next;
        if trace.final_delta < params.tol {
            break;
        }
    }
    let labels = argmax_rows(&posteriors);
    CategoricalResult::from_indices(table, &labels, Some(posteriors), Some(model.alpha), trace)
}

use super::{argmax_rows, majority::vote_fractions, max_abs_diff, CategoricalParams};
use crate::data::{AnnotationTable, CategoricalResult, Trace};
use crate::util::{normalize_log, xlogy};

/// Class priors and per-worker confusion matrices of a fitted Dawid–Skene model.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionModel {
    /// Class prevalence over the table's label set.
    pub priors: Vec<f64>,
    pub workers: Vec<String>,
    /// `confusion[w][c][k]` = P(worker `w` answers `k` | truth `c`); rows sum to one.
    pub confusion: Vec<Vec<Vec<f64>>>,
}

impl ConfusionModel {
    /// Prior-weighted mean of the confusion diagonal.
    pub fn skill(&self, worker: usize) -> f64 {
        self.priors
            .iter()
            .enumerate()
            .map(|(c, p)| p * self.confusion[worker][c][c])
            .sum()
    }

    fn fit(table: &AnnotationTable, posteriors: &[Vec<f64>], smoothing: f64) -> Self {
        let k = table.n_labels();
        let n_tasks = table.n_tasks() as f64;
        let mut priors = vec![0.0; k];
        for p in posteriors {
            for (acc, v) in priors.iter_mut().zip(p) {
                *acc += v;
            }
        }
        priors.iter_mut().for_each(|p| *p /= n_tasks);

        let mut confusion = vec![vec![vec![smoothing; k]; k]; table.n_workers()];
        for r in table.responses() {
            let matrix = &mut confusion[r.worker];
            for (c, &mass) in posteriors[r.task].iter().enumerate() {
                matrix[c][r.label] += mass;
            }
        }
        for matrix in &mut confusion {
            for row in matrix.iter_mut() {
                let total: f64 = row.iter().sum();
                if total > 0.0 {
                    row.iter_mut().for_each(|v| *v /= total);
                } else {
                    row.iter_mut().for_each(|v| *v = 1.0 / k as f64);
                }
            }
        }
        Self {
            priors,
            workers: table.workers().to_vec(),
            confusion,
        }
    }

    /// Posteriors over true labels and the penalized log-likelihood
    /// `ln p(data | model) + smoothing · Σ ln confusion`.
    fn posteriors(&self, table: &AnnotationTable, smoothing: f64) -> (Vec<Vec<f64>>, f64) {
        let log_priors: Vec<f64> = self.priors.iter().map(|p| p.ln()).collect();
        let log_conf: Vec<Vec<Vec<f64>>> = self
            .confusion
            .iter()
            .map(|m| m.iter().map(|row| row.iter().map(|v| v.ln()).collect()).collect())
            .collect();
        let mut log_likelihood = 0.0;
        let posteriors = (0..table.n_tasks())
            .map(|t| {
                let mut logp = log_priors.clone();
                for r in table.task_responses(t) {
                    let lc = &log_conf[r.worker];
                    for (c, v) in logp.iter_mut().enumerate() {
                        *v += lc[c][r.label];
                    }
                }
                log_likelihood += normalize_log(&mut logp);
                logp
            })
            .collect();
        let penalty: f64 = self
            .confusion
            .iter()
            .flatten()
            .flatten()
            .map(|&v| xlogy(smoothing, v))
            .sum();
        (posteriors, log_likelihood + penalty)
    }
}

/// Dawid–Skene EM initialized from majority-vote fractions.
pub fn dawid_skene(table: &AnnotationTable, params: &CategoricalParams) -> CategoricalResult {
    dawid_skene_model(table, params).0
}

/// [`dawid_skene`] that also returns the fitted priors and confusion matrices.
///
/// The trace records the penalized log-likelihood of the parameters fitted in
/// each iteration; with `smoothing = 0` it is the observed-data log-likelihood.
pub fn dawid_skene_model(
    table: &AnnotationTable,
    params: &CategoricalParams,
) -> (CategoricalResult, ConfusionModel) {
    let mut posteriors = vote_fractions(table);
    let mut model = ConfusionModel::fit(table, &posteriors, params.smoothing);
    let mut trace = Trace {
        log_likelihood: Some(Vec::with_capacity(params.n_iter)),
        ..Trace::default()
    };

    for iteration in 1..=params.n_iter {
        if iteration > 1 {
            model = ConfusionModel::fit(table, &posteriors, params.smoothing);
        }
        let (next, log_likelihood) = model.posteriors(table, params.smoothing);
        trace.final_delta = max_abs_diff(&next, &posteriors);
        trace.iterations_run = iteration;
        trace.log_likelihood.as_mut().unwrap().push(log_likelihood);
        posteriors = next;
        if trace.final_delta < params.tol {
            break;
        }
    }

    let labels = argmax_rows(&posteriors);
    let skills = (0..table.n_workers()).map(|w| model.skill(w)).collect();
    let result =
        CategoricalResult::from_indices(table, &labels, Some(posteriors), Some(skills), trace);
    (result, model)
}

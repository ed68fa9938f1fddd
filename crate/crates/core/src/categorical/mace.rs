use rand::Rng;

use super::{argmax_rows, max_abs_diff, CategoricalParams};
use crate::data::{AnnotationTable, CategoricalResult, Trace};
use crate::util::{derive_seed, normalize_log, rng};

/// Spammer model state: `competence[w]` = P(worker copies the truth),
/// `spam[w]` = the label distribution used otherwise.
#[derive(Debug, Clone)]
struct SpamModel {
    competence: Vec<f64>,
    spam: Vec<Vec<f64>>,
}

impl SpamModel {
    fn e_step(&self, table: &AnnotationTable) -> (Vec<Vec<f64>>, f64) {
        let k = table.n_labels();
        let log_prior = -(k as f64).ln();
        let mut log_likelihood = 0.0;
        let posteriors = (0..table.n_tasks())
            .map(|t| {
                let mut logp = vec![log_prior; k];
                for r in table.task_responses(t) {
                    let theta = self.competence[r.worker];
                    let noise = (1.0 - theta) * self.spam[r.worker][r.label];
                    let hit = (theta + noise).ln();
                    let miss = noise.ln();
                    for (c, v) in logp.iter_mut().enumerate() {
                        *v += if c == r.label { hit } else { miss };
                    }
                }
                log_likelihood += normalize_log(&mut logp);
                logp
            })
            .collect();
        (posteriors, log_likelihood)
    }

    fn m_step(&mut self, table: &AnnotationTable, posteriors: &[Vec<f64>], smoothing: f64) {
        let k = table.n_labels();
        let mut knows = vec![0.0; table.n_workers()];
        let mut spam_counts = vec![vec![0.0; k]; table.n_workers()];
        for r in table.responses() {
            let theta = self.competence[r.worker];
            let noise = (1.0 - theta) * self.spam[r.worker][r.label];
            let copy = if theta + noise > 0.0 {
                posteriors[r.task][r.label] * theta / (theta + noise)
            } else {
                0.0
            };
            knows[r.worker] += copy;
            spam_counts[r.worker][r.label] += 1.0 - copy;
        }
        for w in 0..table.n_workers() {
            let n = table.worker_rows(w).len() as f64;
            self.competence[w] = if n + 2.0 * smoothing > 0.0 {
                (knows[w] + smoothing) / (n + 2.0 * smoothing)
            } else {
                0.5
            };
            let total: f64 = spam_counts[w].iter().sum::<f64>() + k as f64 * smoothing;
            for (x, c) in self.spam[w].iter_mut().zip(&spam_counts[w]) {
                *x = if total > 0.0 {
                    (c + smoothing) / total
                } else {
                    1.0 / k as f64
                };
            }
        }
    }
}

struct Run {
    model: SpamModel,
    posteriors: Vec<Vec<f64>>,
    log_likelihood: f64,
    trace: Trace,
}

fn run_once(table: &AnnotationTable, params: &CategoricalParams, restart: usize) -> Run {
    let mut rng = rng(derive_seed(params.seed, &["mace", &restart.to_string()]));
    let k = table.n_labels();
    let competence = (0..table.n_workers())
        .map(|_| rng.random_range(0.4..0.9))
        .collect();
    // spam distributions start at each worker's smoothed label frequencies
    let spam = (0..table.n_workers())
        .map(|w| {
            let mut freq = vec![1.0; k];
            for &i in table.worker_rows(w) {
                freq[table.responses()[i].label] += 1.0;
            }
            let total: f64 = freq.iter().sum();
            freq.into_iter().map(|f| f / total).collect()
        })
        .collect();
    let mut model = SpamModel { competence, spam };
    let (mut posteriors, mut log_likelihood) = model.e_step(table);
    let mut trace = Trace {
        log_likelihood: Some(vec![]),
        ..Trace::default()
    };
    for iteration in 1..=params.n_iter {
        model.m_step(table, &posteriors, params.smoothing);
        let (next, ll) = model.e_step(table);
        trace.final_delta = max_abs_diff(&next, &posteriors);
        trace.iterations_run = iteration;
        trace.log_likelihood.as_mut().unwrap().push(ll);
        posteriors = next;
        log_likelihood = ll;
        if trace.final_delta < params.tol {
            break;
        }
    }
    Run {
        model,
        posteriors,
        log_likelihood,
        trace,
    }
}

/// MACE spammer-model EM with `restarts` seeded initializations; the run with the
/// highest final log-likelihood wins. Skills are the competences `θ`.
pub fn mace(table: &AnnotationTable, params: &CategoricalParams, restarts: usize) -> CategoricalResult {
    let mut best: Option<Run> = None;
    for restart in 0..restarts.max(1) {
        let run = run_once(table, params, restart);
        if best
            .as_ref()
            .is_none_or(|b| run.log_likelihood > b.log_likelihood)
        {
            best = Some(run);
        }
    }
    let best = best.unwrap();
    let labels = argmax_rows(&best.posteriors);
    CategoricalResult::from_indices(
        table,
        &labels,
        Some(best.posteriors),
        Some(best.model.competence),
        best.trace,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_answer_wins() {
        let table = AnnotationTable::from_records([("t", "w", "z")]).unwrap();
        let result = mace(&table, &CategoricalParams::default(), 3);
        assert_eq!(result.labels["t"], "z");
    }

    #[test]
    fn same_seed_same_result() {
        let table = AnnotationTable::from_records([
            ("t1", "w1", "a"),
            ("t1", "w2", "b"),
            ("t2", "w1", "a"),
            ("t2", "w2", "a"),
            ("t2", "w3", "b"),
        ])
        .unwrap();
        let params = CategoricalParams::default().with_seed(9);
        assert_eq!(mace(&table, &params, 5), mace(&table, &params, 5));
    }
}

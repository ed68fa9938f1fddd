use rand_distr::{Distribution, Normal};

use super::{majority::mv_labels, CategoricalParams};
use crate::data::{AnnotationTable, CategoricalResult, Trace};
use crate::error::{Error, Result};
use crate::util::{derive_seed, rng};

/// Karger–Oh–Shah message passing for binary tasks.
///
/// The lexicographically first label maps to `+1`. Messages are rescaled to unit
/// RMS after every round, which leaves every sign untouched. A task whose final
/// sum is exactly zero falls back to its majority-vote label.
pub fn kos(table: &AnnotationTable, params: &CategoricalParams, k_iter: usize) -> Result<CategoricalResult> {
    if table.n_labels() != 2 {
        return Err(Error::NotBinary(table.n_labels()));
    }
    let responses = table.responses();
    let sign: Vec<f64> = responses
        .iter()
        .map(|r| if r.label == 0 { 1.0 } else { -1.0 })
        .collect();
    let mut rng = rng(derive_seed(params.seed, &["kos"]));
    let normal = Normal::new(1.0, 1.0).unwrap();
    let mut worker_msg: Vec<f64> = responses.iter().map(|_| normal.sample(&mut rng)).collect();
    let mut task_msg = vec![0.0; responses.len()];

    for _ in 0..k_iter {
        for t in 0..table.n_tasks() {
            let range = table.task_range(t);
            let total: f64 = range.clone().map(|i| sign[i] * worker_msg[i]).sum();
            for i in range {
                task_msg[i] = total - sign[i] * worker_msg[i];
            }
        }
        for w in 0..table.n_workers() {
            let rows = table.worker_rows(w);
            let total: f64 = rows.iter().map(|&i| sign[i] * task_msg[i]).sum();
            for &i in rows {
                worker_msg[i] = total - sign[i] * task_msg[i];
            }
        }
        let rms = (worker_msg.iter().map(|v| v * v).sum::<f64>() / worker_msg.len() as f64).sqrt();
        if rms > 0.0 && rms.is_finite() {
            worker_msg.iter_mut().for_each(|v| *v /= rms);
        }
    }

    let fallback = mv_labels(table);
    let labels: Vec<usize> = (0..table.n_tasks())
        .map(|t| {
            let decision: f64 = table.task_range(t).map(|i| sign[i] * worker_msg[i]).sum();
            if decision > 0.0 {
                0
            } else if decision < 0.0 {
                1
            } else {
                fallback[t]
            }
        })
        .collect();
    Ok(CategoricalResult::from_indices(
        table,
        &labels,
        None,
        None,
        Trace {
            iterations_run: k_iter,
            ..Trace::default()
        },
    ))
}

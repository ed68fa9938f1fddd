use rand::Rng;

use super::{argmax_rows, weighted_votes, CategoricalParams};
use crate::data::{AnnotationTable, CategoricalResult, Trace};
use crate::error::{Error, Result};
use crate::util::{derive_seed, rng};

const SKILL_EPS: f64 = 1e-4;

/// Pairwise agreement statistics over co-annotated tasks.
struct Agreement {
    /// `(j, overlap, R_ij)` for every worker `j` sharing a task with `i`.
    neighbours: Vec<Vec<(usize, f64, f64)>>,
}

impl Agreement {
    fn new(table: &AnnotationTable) -> Self {
        let n = table.n_workers();
        let m = table.n_labels() as f64;
        let mut overlap = vec![vec![0u32; n]; n];
        let mut agree = vec![vec![0u32; n]; n];
        for t in 0..table.n_tasks() {
            let rows = table.task_responses(t);
            for (a, ra) in rows.iter().enumerate() {
                for rb in &rows[a + 1..] {
                    overlap[ra.worker][rb.worker] += 1;
                    overlap[rb.worker][ra.worker] += 1;
                    if ra.label == rb.label {
                        agree[ra.worker][rb.worker] += 1;
                        agree[rb.worker][ra.worker] += 1;
                    }
                }
            }
        }
        let neighbours = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && overlap[i][j] > 0)
                    .map(|j| {
                        let n_ij = overlap[i][j] as f64;
                        let c = agree[i][j] as f64 / n_ij;
                        (j, n_ij, (m * c - 1.0) / (m - 1.0))
                    })
                    .collect()
            })
            .collect();
        Self { neighbours }
    }

    fn is_connected(&self) -> bool {
        let n = self.neighbours.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &(j, _, _) in &self.neighbours[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Matrix-mean-subsequence-reduced skill recovery followed by a log-odds weighted vote.
pub fn mmsr(table: &AnnotationTable, params: &CategoricalParams) -> Result<CategoricalResult> {
    let mut rng = rng(derive_seed(params.seed, &["mmsr"]));
    let init = (0..table.n_workers())
        .map(|_| rng.random_range(0.0..1.0))
        .collect();
    mmsr_with_init(table, params, init)
}

/// [`mmsr`] with an explicit starting vector for the rank-one factor.
///
/// Agreement rates become `R = (M·C − 1)/(M − 1)`, whose expectation is `x_i x_j`
/// for `x_i = (M s_i − 1)/(M − 1)`. Each sweep solves the overlap-weighted least
/// squares problem for one `x_i` at a time and clips it to `[−1, 1]`. The sign of
/// `x` is fixed so that the mean recovered skill is at least `1/M`.
pub fn mmsr_with_init(
    table: &AnnotationTable,
    params: &CategoricalParams,
    init: Vec<f64>,
) -> Result<CategoricalResult> {
    if table.n_workers() < 2 {
        return Err(Error::TooFewWorkers);
    }
    let m = table.n_labels().max(2) as f64;
    let agreement = Agreement::new(table);
    if !agreement.is_connected() {
        return Err(Error::NoOverlap);
    }

    let mut x = init;
    let mut trace = Trace::default();
    for sweep in 1..=params.n_iter {
        let mut delta: f64 = 0.0;
        for i in 0..x.len() {
            let (num, den) = agreement.neighbours[i]
                .iter()
                .fold((0.0, 0.0), |(num, den), &(j, n_ij, r)| {
                    (num + n_ij * r * x[j], den + n_ij * x[j] * x[j])
                });
            if den > 0.0 {
                let next = (num / den).clamp(-1.0, 1.0);
                delta = delta.max((next - x[i]).abs());
                x[i] = next;
            }
        }
        trace.iterations_run = sweep;
        trace.final_delta = delta;
        if delta < params.tol {
            break;
        }
    }
    if x.iter().sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }

    let skills: Vec<f64> = x
        .iter()
        .map(|v| ((1.0 + (m - 1.0) * v) / m).clamp(SKILL_EPS, 1.0 - SKILL_EPS))
        .collect();
    let weights: Vec<f64> = skills
        .iter()
        .map(|s| ((m - 1.0) * s / (1.0 - s)).ln())
        .collect();
    let labels = argmax_rows(&weighted_votes(table, &weights));
    Ok(CategoricalResult::from_indices(
        table,
        &labels,
        None,
        Some(skills),
        trace,
    ))
}

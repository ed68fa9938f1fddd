use std::collections::BTreeMap;

use super::embed::{cosine, Embedder};
use super::SequenceResult;
use crate::data::{SequenceTable, Trace};
use crate::util::TIE_TOLERANCE;

struct Fitted {
    /// Row indices per task, task order.
    tasks: Vec<(String, Vec<usize>)>,
    embeddings: Vec<Vec<f64>>,
    row_worker: Vec<usize>,
    reliability: Vec<f64>,
    centroids: Vec<Vec<f64>>,
    trace: Trace,
}

fn centroid(rows: &[usize], embeddings: &[Vec<f64>], row_worker: &[usize], r: &[f64]) -> Vec<f64> {
    let mut total: f64 = rows.iter().map(|&k| r[row_worker[k]]).sum();
    let uniform = total <= 0.0;
    if uniform {
        total = rows.len() as f64;
    }
    let mut c = vec![0.0; embeddings[rows[0]].len()];
    for &k in rows {
        let w = if uniform { 1.0 } else { r[row_worker[k]] };
        for (ci, e) in c.iter_mut().zip(&embeddings[k]) {
            *ci += w * e / total;
        }
    }
    c
}

/// Reliability loop shared by both selectors. Tasks with a single response
/// say nothing about reliability and are left out of the update.
fn fit(table: &SequenceTable, embedder: &dyn Embedder, n_iter: usize) -> Fitted {
    let rows = table.rows();
    let texts: Vec<String> = rows.iter().map(|r| r.text()).collect();
    let text_refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let embeddings = embedder.embed_batch(&text_refs);
    let worker_ix: BTreeMap<&str, usize> = table
        .workers()
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let row_worker: Vec<usize> = rows.iter().map(|r| worker_ix[r.worker.as_str()]).collect();
    let tasks: Vec<(String, Vec<usize>)> = table
        .task_row_indices()
        .map(|(t, ix)| (t.to_owned(), ix.to_vec()))
        .collect();

    let n_workers = table.workers().len();
    let mut r = vec![1.0; n_workers];
    let mut trace = Trace::default();
    for iteration in 1..=n_iter {
        let mut sums = vec![0.0; n_workers];
        let mut counts = vec![0usize; n_workers];
        for (_, ix) in tasks.iter().filter(|(_, ix)| ix.len() > 1) {
            let c = centroid(ix, &embeddings, &row_worker, &r);
            for &k in ix {
                sums[row_worker[k]] += cosine(&embeddings[k], &c).max(0.0);
                counts[row_worker[k]] += 1;
            }
        }
        let mut delta: f64 = 0.0;
        for w in 0..n_workers {
            if counts[w] > 0 {
                let next = sums[w] / counts[w] as f64;
                delta = delta.max((next - r[w]).abs());
                r[w] = next;
            }
        }
        trace.iterations_run = iteration;
        trace.final_delta = delta;
    }
    let centroids = tasks
        .iter()
        .map(|(_, ix)| centroid(ix, &embeddings, &row_worker, &r))
        .collect();
    Fitted {
        tasks,
        embeddings,
        row_worker,
        reliability: r,
        centroids,
        trace,
    }
}

/// Highest score wins; near-equal scores go to the lexicographically smaller text.
fn select(table: &SequenceTable, ix: &[usize], score: impl Fn(usize) -> f64) -> Vec<String> {
    let rows = table.rows();
    let scores: Vec<f64> = ix.iter().map(|&k| score(k)).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cutoff = best - TIE_TOLERANCE * best.abs().max(1.0);
    ix.iter()
        .zip(&scores)
        .filter(|(_, &s)| s >= cutoff)
        .map(|(&k, _)| &rows[k].tokens)
        .min()
        .cloned()
        .unwrap_or_default()
}

fn finish(table: &SequenceTable, fitted: &Fitted, labels: BTreeMap<String, Vec<String>>) -> SequenceResult {
    SequenceResult {
        labels,
        label_set: vec![],
        posteriors: None,
        skills: Some(
            table
                .workers()
                .iter()
                .cloned()
                .zip(fitted.reliability.iter().copied())
                .collect(),
        ),
        trace: fitted.trace.clone(),
    }
}

/// Reliability-weighted centroid per task; each task's answer is the
/// response closest to its centroid, copied verbatim.
pub fn rasa(table: &SequenceTable, embedder: &dyn Embedder, n_iter: usize) -> SequenceResult {
    let fitted = fit(table, embedder, n_iter);
    let labels = fitted
        .tasks
        .iter()
        .zip(&fitted.centroids)
        .map(|((task, ix), c)| {
            let out = select(table, ix, |k| cosine(&fitted.embeddings[k], c));
            (task.clone(), out)
        })
        .collect();
    finish(table, &fitted, labels)
}

/// Like [`rasa`], but a response is scored by `r^λ · l^(1−λ)` where `l` is its
/// mean similarity to the task's other responses.
pub fn hrrasa(
    table: &SequenceTable,
    embedder: &dyn Embedder,
    n_iter: usize,
    local_weight: f64,
) -> SequenceResult {
    let fitted = fit(table, embedder, n_iter);
    let e = &fitted.embeddings;
    let labels = fitted
        .tasks
        .iter()
        .map(|(task, ix)| {
            let local = |k: usize| {
                if ix.len() == 1 {
                    return 1.0;
                }
                let total: f64 = ix.iter().filter(|&&o| o != k).map(|&o| cosine(&e[k], &e[o])).sum();
                (total / (ix.len() - 1) as f64).max(0.0)
            };
            let out = select(table, ix, |k| {
                fitted.reliability[fitted.row_worker[k]].powf(local_weight)
                    * local(k).powf(1.0 - local_weight)
            });
            (task.clone(), out)
        })
        .collect();
    finish(table, &fitted, labels)
}

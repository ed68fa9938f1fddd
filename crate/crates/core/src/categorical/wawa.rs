use super::{argmax_rows, majority::mv_labels, weighted_votes};
use crate::data::{AnnotationTable, CategoricalResult, Trace};

/// Worker agreement with aggregate.
///
/// Skills are the Laplace-smoothed share `(m + 1) / (n + 2)` of a worker's `n`
/// responses that match the majority vote; labels are the skill-weighted vote.
pub fn wawa(table: &AnnotationTable) -> CategoricalResult {
    let skills = agreement_skills(table, 1.0, 2.0);
    let mass = weighted_votes(table, &skills);
    let labels = argmax_rows(&mass);
    let posteriors = mass
        .into_iter()
        .map(|m| {
            let total: f64 = m.iter().sum();
            m.into_iter().map(|v| v / total).collect()
        })
        .collect();
    CategoricalResult::from_indices(
        table,
        &labels,
        Some(posteriors),
        Some(skills),
        Trace {
            iterations_run: 1,
            ..Trace::default()
        },
    )
}

/// `(matches + prior_hits) / (responses + prior_total)` against majority-vote labels.
pub(crate) fn agreement_skills(table: &AnnotationTable, prior_hits: f64, prior_total: f64) -> Vec<f64> {
    let mv = mv_labels(table);
    let responses = table.responses();
    (0..table.n_workers())
        .map(|w| {
            let rows = table.worker_rows(w);
            let hits = rows
                .iter()
                .filter(|&&i| responses[i].label == mv[responses[i].task])
                .count();
            (hits as f64 + prior_hits) / (rows.len() as f64 + prior_total)
        })
        .collect()
}

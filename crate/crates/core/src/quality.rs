//! Annotation-quality estimators that need no ground truth.

use std::collections::BTreeMap;

use crate::categorical::majority_vote;
use crate::data::{AnnotationTable, CategoricalResult};
use crate::error::{Error, Result};
use crate::util::xlogy;

/// Disagreement between two label values.
pub enum Distance<'a> {
    /// `δ(c, k) = 1[c ≠ k]`.
    Nominal,
    Custom(&'a dyn Fn(&str, &str) -> f64),
}

impl Distance<'_> {
    fn eval(&self, a: &str, b: &str) -> f64 {
        match self {
            Distance::Nominal => f64::from(u8::from(a != b)),
            Distance::Custom(f) => f(a, b),
        }
    }
}

/// Krippendorff's α and whether the data were degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha {
    pub value: f64,
    /// No disagreement was expected (one label overall); `value` is pinned to 1.
    pub degenerate: bool,
}

/// Krippendorff's α from the coincidence matrix.
///
/// Units with fewer than two responses are not pairable and are skipped.
pub fn krippendorff_alpha(table: &AnnotationTable, distance: &Distance<'_>) -> Result<Alpha> {
    let k = table.n_labels();
    let mut coincidence = vec![vec![0.0; k]; k];
    let mut pairable = false;
    for t in 0..table.n_tasks() {
        let rows = table.task_responses(t);
        if rows.len() < 2 {
            continue;
        }
        pairable = true;
        let weight = 1.0 / (rows.len() - 1) as f64;
        let mut counts = vec![0.0; k];
        for r in rows {
            counts[r.label] += 1.0;
        }
        for c in 0..k {
            for j in 0..k {
                // ordered pairs of distinct responses
                let pairs = if c == j {
                    counts[c] * (counts[c] - 1.0)
                } else {
                    counts[c] * counts[j]
                };
                coincidence[c][j] += pairs * weight;
            }
        }
    }
    if !pairable {
        return Err(Error::NoCoincidences);
    }
    let labels = table.labels();
    let delta: Vec<Vec<f64>> = labels
        .iter()
        .map(|a| labels.iter().map(|b| distance.eval(a, b)).collect())
        .collect();
    let marginals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let total: f64 = marginals.iter().sum();
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for j in 0..k {
            observed += coincidence[c][j] * delta[c][j];
            expected += marginals[c] * marginals[j] * delta[c][j];
        }
    }
    expected /= total - 1.0;
    if expected == 0.0 {
        return Ok(Alpha {
            value: 1.0,
            degenerate: true,
        });
    }
    Ok(Alpha {
        value: 1.0 - observed / expected,
        degenerate: false,
    })
}

/// Share of all responses that match their task's majority-vote label.
pub fn agreement_with_aggregate(table: &AnnotationTable) -> f64 {
    let mv = majority_vote(table);
    let hits = table
        .records()
        .filter(|(task, _, label)| mv.labels[*task] == *label)
        .count();
    hits as f64 / table.responses().len() as f64
}

/// Per-task entropies (nats) and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Uncertainty {
    pub per_task: BTreeMap<String, f64>,
    pub mean: f64,
}

/// Shannon entropy of each task's skill-weighted label distribution.
///
/// Workers missing from `skills` weigh 1; negative skills count as 0. A task
/// whose weights are all zero falls back to unweighted counts.
pub fn uncertainty(table: &AnnotationTable, skills: Option<&BTreeMap<String, f64>>) -> Uncertainty {
    let weights: Vec<f64> = table
        .workers()
        .iter()
        .map(|w| {
            skills
                .and_then(|s| s.get(w))
                .copied()
                .unwrap_or(1.0)
                .max(0.0)
        })
        .collect();
    let per_task: BTreeMap<String, f64> = (0..table.n_tasks())
        .map(|t| {
            let mut mass = vec![0.0; table.n_labels()];
            for r in table.task_responses(t) {
                mass[r.label] += weights[r.worker];
            }
            if mass.iter().sum::<f64>() == 0.0 {
                for r in table.task_responses(t) {
                    mass[r.label] += 1.0;
                }
            }
            let total: f64 = mass.iter().sum();
            let entropy = -mass
                .iter()
                .map(|&m| {
                    let p = m / total;
                    xlogy(p, p)
                })
                .sum::<f64>();
            (table.tasks()[t].clone(), entropy.max(0.0))
        })
        .collect();
    let mean = per_task.values().sum::<f64>() / per_task.len() as f64;
    Uncertainty { per_task, mean }
}

/// Mean over tasks of the largest posterior probability.
pub fn ds_posterior_quality(result: &CategoricalResult) -> Result<f64> {
    let posteriors = result.posteriors.as_ref().ok_or(Error::MissingPosteriors)?;
    if posteriors.is_empty() {
        return Err(Error::MissingPosteriors);
    }
    let total: f64 = posteriors
        .values()
        .map(|p| p.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum();
    Ok(total / posteriors.len() as f64)
}

use std::collections::BTreeMap;

use super::{PairwiseParams, ScoreResult};
use crate::data::{PairwiseTable, Trace};
use crate::error::{Error, Result};

/// Virtual wins (and losses) each item scores against the pseudo-item.
const PSEUDO_WINS: f64 = 0.5;

struct Graph {
    wins: Vec<f64>,
    /// `(j, n_ij)` per item.
    pairs: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    fn new(table: &PairwiseTable) -> Self {
        let n = table.items().len();
        let mut wins = vec![0.0; n];
        let mut counts: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for c in table.comparisons() {
            wins[c.winner()] += 1.0;
            *counts.entry((c.left.min(c.right), c.left.max(c.right))).or_default() += 1.0;
        }
        let mut pairs = vec![Vec::new(); n];
        for (&(i, j), &count) in &counts {
            pairs[i].push((j, count));
            pairs[j].push((i, count));
        }
        Self { wins, pairs }
    }

    /// Every item reaches every other along "beat" edges.
    fn strongly_connected(table: &PairwiseTable) -> bool {
        let n = table.items().len();
        let mut forward = vec![Vec::new(); n];
        let mut backward = vec![Vec::new(); n];
        for c in table.comparisons() {
            forward[c.winner()].push(c.loser());
            backward[c.loser()].push(c.winner());
        }
        let reaches_all = |adj: &[Vec<usize>]| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for &j in &adj[i] {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reaches_all(&forward) && reaches_all(&backward)
    }

    /// Adds an extra node that every item beats, and loses to, half a time.
    fn with_pseudo_item(mut self) -> Self {
        let n = self.wins.len();
        self.wins.iter_mut().for_each(|w| *w += PSEUDO_WINS);
        self.wins.push(PSEUDO_WINS * n as f64);
        let mut pseudo = Vec::with_capacity(n);
        for (i, pairs) in self.pairs.iter_mut().enumerate() {
            pairs.push((n, 2.0 * PSEUDO_WINS));
            pseudo.push((i, 2.0 * PSEUDO_WINS));
        }
        self.pairs.push(pseudo);
        self
    }

    fn log_likelihood(&self, p: &[f64]) -> f64 {
        let mut ll = 0.0;
        for (i, pairs) in self.pairs.iter().enumerate() {
            if self.wins[i] > 0.0 {
                ll += self.wins[i] * p[i].ln();
            }
            for &(j, n_ij) in pairs {
                if i < j {
                    ll -= n_ij * (p[i] + p[j]).ln();
                }
            }
        }
        ll
    }
}

/// Bradley–Terry strengths by minorization–maximization.
///
/// When the "beat" graph is not strongly connected the maximum-likelihood
/// estimate does not exist; a pseudo-item then shrinks all strengths toward
/// each other. Scores are `ln p`, and the trace records the (regularized)
/// log-likelihood after every sweep.
pub fn bradley_terry(table: &PairwiseTable, params: &PairwiseParams) -> Result<ScoreResult> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let n_items = table.items().len();
    let mut graph = Graph::new(table);
    if !Graph::strongly_connected(table) {
        graph = graph.with_pseudo_item();
    }
    let n = graph.wins.len();
    let mut p = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut trace = Trace {
        log_likelihood: Some(vec![]),
        ..Trace::default()
    };
    for sweep in 1..=params.n_iter {
        for i in 0..n {
            let denom: f64 = graph.pairs[i]
                .iter()
                .map(|&(j, n_ij)| n_ij / (p[i] + p[j]))
                .sum();
            next[i] = graph.wins[i] / denom;
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let delta = p
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut p, &mut next);
        trace.iterations_run = sweep;
        trace.final_delta = delta;
        trace
            .log_likelihood
            .as_mut()
            .unwrap()
            .push(graph.log_likelihood(&p));
        if delta < params.tol {
            break;
        }
    }
    let scores: Vec<f64> = p[..n_items].iter().map(|v| v.ln()).collect();
    Ok(ScoreResult::new(table.items(), &scores, None, trace))
}

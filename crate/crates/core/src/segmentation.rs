//! Fusion of several workers' binary masks for one image.

use std::collections::BTreeMap;

use crate::data::{Mask, MaskSet, Trace};
use crate::error::{Error, Result};
use crate::sequence::cosine;
use crate::util::{log_sum_exp, sigmoid};

fn shape_of(set: &MaskSet) -> Result<(usize, usize)> {
    set.shape().ok_or(Error::EmptyResponses)
}

fn vote_counts(set: &MaskSet) -> Vec<usize> {
    let (h, w) = set.shape().unwrap_or((0, 0));
    let mut counts = vec![0; h * w];
    for (_, m) in set.masks() {
        for (c, &v) in counts.iter_mut().zip(m.cells()) {
            *c += usize::from(v);
        }
    }
    counts
}

/// A pixel is set when strictly more than half the masks set it.
pub fn seg_majority_vote(set: &MaskSet) -> Result<Mask> {
    let (h, w) = shape_of(set)?;
    let n = set.len();
    let cells = vote_counts(set).into_iter().map(|c| 2 * c > n).collect();
    Mask::new(h, w, cells)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegEmResult {
    pub mask: Mask,
    /// `P(z = 1)` per pixel, row-major.
    pub posterior: Vec<f64>,
    /// `P(worker marks 1 | z = 1)`.
    pub sensitivity: BTreeMap<String, f64>,
    /// `P(worker marks 0 | z = 0)`.
    pub specificity: BTreeMap<String, f64>,
    pub prior: f64,
    pub trace: Trace,
}

struct Bernoulli {
    a: Vec<f64>,
    b: Vec<f64>,
    prior: f64,
}

impl Bernoulli {
    fn fit(set: &MaskSet, q: &[f64], s: f64) -> Self {
        let fg: f64 = q.iter().sum();
        let bg = q.len() as f64 - fg;
        let mut a = Vec::with_capacity(set.len());
        let mut b = Vec::with_capacity(set.len());
        for (_, m) in set.masks() {
            let (mut hit, mut reject) = (0.0, 0.0);
            for (&qi, &v) in q.iter().zip(m.cells()) {
                if v {
                    hit += qi;
                } else {
                    reject += 1.0 - qi;
                }
            }
            a.push((hit + s) / (fg + 2.0 * s));
            b.push((reject + s) / (bg + 2.0 * s));
        }
        Self {
            a,
            b,
            prior: (fg + s) / (q.len() as f64 + 2.0 * s),
        }
    }

    /// Fills `q` with posteriors and returns the log-likelihood plus the
    /// log-density of the Beta(1+s, 1+s) priors behind the smoothing.
    fn posteriors(&self, set: &MaskSet, q: &mut [f64], s: f64) -> f64 {
        let log = |p: f64| p.ln();
        let mut ll = 0.0;
        for (p, qp) in q.iter_mut().enumerate() {
            let mut on = log(self.prior);
            let mut off = log(1.0 - self.prior);
            for (w, (_, m)) in set.masks().iter().enumerate() {
                if m.cells()[p] {
                    on += log(self.a[w]);
                    off += log(1.0 - self.b[w]);
                } else {
                    on += log(1.0 - self.a[w]);
                    off += log(self.b[w]);
                }
            }
            *qp = sigmoid(on - off);
            ll += log_sum_exp(&[on, off]);
        }
        let penalty: f64 = self
            .a
            .iter()
            .chain(&self.b)
            .chain(std::iter::once(&self.prior))
            .map(|&v| v.ln() + (1.0 - v).ln())
            .sum();
        ll + s * penalty
    }
}

/// Per-worker sensitivity/specificity EM, started from majority vote with
/// tied pixels at 0.5. The output keeps pixels whose posterior exceeds 0.5.
pub fn seg_em(set: &MaskSet, n_iter: usize, smoothing: f64) -> Result<SegEmResult> {
    let (h, w) = shape_of(set)?;
    let n = set.len();
    let mut q: Vec<f64> = vote_counts(set)
        .into_iter()
        .map(|c| match (2 * c).cmp(&n) {
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => 0.5,
        })
        .collect();
    let mut trace = Trace {
        log_likelihood: Some(vec![]),
        ..Trace::default()
    };
    let mut model = Bernoulli::fit(set, &q, smoothing);
    let mut next = q.clone();
    for iteration in 1..=n_iter {
        if iteration > 1 {
            model = Bernoulli::fit(set, &q, smoothing);
        }
        let ll = model.posteriors(set, &mut next, smoothing);
        let delta = q
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut q, &mut next);
        trace.iterations_run = iteration;
        trace.final_delta = delta;
        trace.log_likelihood.as_mut().unwrap().push(ll);
    }
    let names = set.masks().iter().map(|(name, _)| name.clone());
    Ok(SegEmResult {
        mask: Mask::new(h, w, q.iter().map(|&p| p > 0.5).collect())?,
        sensitivity: names.clone().zip(model.a.iter().copied()).collect(),
        specificity: names.zip(model.b.iter().copied()).collect(),
        prior: model.prior,
        posterior: q,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegRasaResult {
    pub mask: Mask,
    pub reliability: BTreeMap<String, f64>,
    pub trace: Trace,
}

fn weighted_mean(vectors: &[Vec<f64>], r: &[f64]) -> Vec<f64> {
    let mut total: f64 = r.iter().sum();
    let uniform = total <= 0.0;
    if uniform {
        total = r.len() as f64;
    }
    let mut c = vec![0.0; vectors[0].len()];
    for (v, &rw) in vectors.iter().zip(r) {
        let weight = if uniform { 1.0 } else { rw } / total;
        for (ci, x) in c.iter_mut().zip(v) {
            *ci += weight * x;
        }
    }
    c
}

/// Reliabilities from cosine agreement with the weighted mean mask; the
/// output is that mean thresholded above 0.5. An all-zero mask has
/// similarity 0 and so drops out of the mean.
pub fn seg_rasa(set: &MaskSet, n_iter: usize) -> Result<SegRasaResult> {
    let (h, w) = shape_of(set)?;
    let vectors: Vec<Vec<f64>> = set
        .masks()
        .iter()
        .map(|(_, m)| m.cells().iter().map(|&v| f64::from(u8::from(v))).collect())
        .collect();
    let mut r = vec![1.0; vectors.len()];
    let mut trace = Trace::default();
    for iteration in 1..=n_iter {
        let c = weighted_mean(&vectors, &r);
        let mut delta: f64 = 0.0;
        for (rw, v) in r.iter_mut().zip(&vectors) {
            let next = cosine(v, &c).max(0.0);
            delta = delta.max((next - *rw).abs());
            *rw = next;
        }
        trace.iterations_run = iteration;
        trace.final_delta = delta;
    }
    let c = weighted_mean(&vectors, &r);
    Ok(SegRasaResult {
        mask: Mask::new(h, w, c.iter().map(|&v| v > 0.5).collect())?,
        reliability: set.masks().iter().map(|(n, _)| n.clone()).zip(r).collect(),
        trace,
    })
}

//! Scores used to compare aggregates with ground truth.

use std::collections::BTreeMap;

use crate::data::Mask;
use crate::error::{Error, Result};

/// Share of ground-truth tasks whose predicted label matches exactly.
pub fn accuracy(pred: &BTreeMap<String, String>, truth: &BTreeMap<String, String>) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::InvalidParameter("empty ground truth".into()));
    }
    let mut hits = 0usize;
    for (task, label) in truth {
        let predicted = pred
            .get(task)
            .ok_or_else(|| Error::MissingPrediction(task.clone()))?;
        hits += usize::from(predicted == label);
    }
    Ok(hits as f64 / truth.len() as f64)
}

/// Ranks starting at 1; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        // a constant ranking carries no association
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman's ρ over the items both maps share.
pub fn spearman_rho(scores: &BTreeMap<String, f64>, truth: &BTreeMap<String, f64>) -> Result<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = truth
        .iter()
        .filter_map(|(item, t)| scores.get(item).map(|s| (*s, *t)))
        .unzip();
    if x.len() < 2 {
        return Err(Error::FewerThanTwoItems);
    }
    Ok(pearson(&average_ranks(&x), &average_ranks(&y)))
}

/// Unit-cost Levenshtein distance.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Word error rate: edit distance over reference length. An empty reference
/// scores `|hyp|`.
pub fn wer<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> f64 {
    let hyp: Vec<&str> = hyp.iter().map(AsRef::as_ref).collect();
    let reference: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    if reference.is_empty() {
        return hyp.len() as f64;
    }
    edit_distance(&hyp, &reference) as f64 / reference.len() as f64
}

/// Mean per-task WER over the ground-truth tasks.
pub fn corpus_wer(
    pred: &BTreeMap<String, Vec<String>>,
    truth: &BTreeMap<String, Vec<String>>,
) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::InvalidParameter("empty ground truth".into()));
    }
    let mut total = 0.0;
    for (task, reference) in truth {
        let hyp = pred
            .get(task)
            .ok_or_else(|| Error::MissingPrediction(task.clone()))?;
        total += wer(hyp, reference);
    }
    Ok(total / truth.len() as f64)
}

/// Intersection over union; two empty masks score 1.
pub fn iou(a: &Mask, b: &Mask) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.cells().iter().zip(b.cells()) {
        inter += usize::from(x && y);
        union += usize::from(x || y);
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

/// Mean IoU over the ground-truth tasks.
pub fn mean_iou(pred: &BTreeMap<String, Mask>, truth: &BTreeMap<String, Mask>) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::InvalidParameter("empty ground truth".into()));
    }
    let mut total = 0.0;
    for (task, reference) in truth {
        let mask = pred
            .get(task)
            .ok_or_else(|| Error::MissingPrediction(task.clone()))?;
        total += iou(mask, reference).map_err(|_| Error::ShapeMismatch(task.clone()))?;
    }
    Ok(total / truth.len() as f64)
}

//! Straight-from-definition reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crowdinfer::data::Mask;
use crowdinfer::util::Rng;
use rand::Rng as _;

pub type Record = (String, String, String);

/// Responses as a dense task × worker grid of label indices.
pub struct Dense {
    pub tasks: Vec<String>,
    pub workers: Vec<String>,
    pub labels: Vec<String>,
    pub grid: Vec<Vec<Option<usize>>>,
}

pub fn dense(records: &[Record]) -> Dense {
    let tasks: Vec<String> = records.iter().map(|r| r.0.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let workers: Vec<String> = records.iter().map(|r| r.1.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let labels: Vec<String> = records.iter().map(|r| r.2.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut grid = vec![vec![None; workers.len()]; tasks.len()];
    for (t, w, l) in records {
        let ti = tasks.iter().position(|x| x == t).unwrap();
        let wi = workers.iter().position(|x| x == w).unwrap();
        grid[ti][wi] = Some(labels.iter().position(|x| x == l).unwrap());
    }
    Dense { tasks, workers, labels, grid }
}

/// First index whose value is within 1e-12 (relative) of the maximum.
pub fn first_max(v: &[f64]) -> usize {
    let best = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cut = best - 1e-12 * best.abs().max(1.0);
    v.iter().position(|&x| x >= cut).unwrap()
}

pub struct Aggregate {
    pub labels: BTreeMap<String, String>,
    pub posteriors: BTreeMap<String, Vec<f64>>,
    pub skills: BTreeMap<String, f64>,
    pub log_likelihood: Vec<f64>,
}

fn finish(d: &Dense, post: Vec<Vec<f64>>, skills: Vec<f64>, ll: Vec<f64>) -> Aggregate {
    Aggregate {
        labels: d.tasks.iter().zip(&post).map(|(t, p)| (t.clone(), d.labels[first_max(p)].clone())).collect(),
        posteriors: d.tasks.iter().cloned().zip(post).collect(),
        skills: d.workers.iter().cloned().zip(skills).collect(),
        log_likelihood: ll,
    }
}

fn counts(d: &Dense, weights: &[f64]) -> Vec<Vec<f64>> {
    d.grid
        .iter()
        .map(|row| {
            let mut c = vec![0.0; d.labels.len()];
            for (w, l) in row.iter().enumerate() {
                if let Some(l) = l {
                    c[*l] += weights[w];
                }
            }
            c
        })
        .collect()
}

fn normalized(rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    rows.into_iter()
        .map(|r| {
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

pub fn mv_oracle(records: &[Record]) -> Aggregate {
    let d = dense(records);
    let post = normalized(counts(&d, &vec![1.0; d.workers.len()]));
    finish(&d, post, vec![], vec![])
}

pub fn wawa_oracle(records: &[Record]) -> Aggregate {
    let d = dense(records);
    let mv: Vec<usize> = counts(&d, &vec![1.0; d.workers.len()]).iter().map(|c| first_max(c)).collect();
    let skills: Vec<f64> = (0..d.workers.len())
        .map(|w| {
            let (mut hit, mut n) = (0.0, 0.0);
            for (t, row) in d.grid.iter().enumerate() {
                if let Some(l) = row[w] {
                    n += 1.0;
                    if l == mv[t] {
                        hit += 1.0;
                    }
                }
            }
            (hit + 1.0) / (n + 2.0)
        })
        .collect();
    let post = normalized(counts(&d, &skills));
    finish(&d, post, skills, vec![])
}

/// Dawid–Skene EM in probability space with dense loops, run for exactly `n_iter` iterations.
pub fn ds_oracle(records: &[Record], n_iter: usize, smoothing: f64) -> Aggregate {
    let d = dense(records);
    let (nt, nw, k) = (d.tasks.len(), d.workers.len(), d.labels.len());
    let mut post = normalized(counts(&d, &vec![1.0; nw]));
    let mut ll_trace = vec![];
    let mut prior = vec![0.0; k];
    let mut conf = vec![vec![vec![0.0; k]; k]; nw];
    for _ in 0..n_iter {
        for c in 0..k {
            prior[c] = (0..nt).map(|t| post[t][c]).sum::<f64>() / nt as f64;
        }
        for w in 0..nw {
            for c in 0..k {
                let mut row = vec![smoothing; k];
                for t in 0..nt {
                    if let Some(l) = d.grid[t][w] {
                        row[l] += post[t][c];
                    }
                }
                let s: f64 = row.iter().sum();
                conf[w][c] = if s > 0.0 {
                    row.iter().map(|v| v / s).collect()
                } else {
                    vec![1.0 / k as f64; k]
                };
            }
        }
        let mut ll = 0.0;
        for t in 0..nt {
            let joint: Vec<f64> = (0..k)
                .map(|c| {
                    let mut p = prior[c];
                    for w in 0..nw {
                        if let Some(l) = d.grid[t][w] {
                            p *= conf[w][c][l];
                        }
                    }
                    p
                })
                .collect();
            let z: f64 = joint.iter().sum();
            ll += z.ln();
            post[t] = joint.iter().map(|p| p / z).collect();
        }
        for w in 0..nw {
            for c in 0..k {
                for l in 0..k {
                    if smoothing > 0.0 {
                        ll += smoothing * conf[w][c][l].ln();
                    }
                }
            }
        }
        ll_trace.push(ll);
    }
    let skills = (0..nw)
        .map(|w| (0..k).map(|c| prior[c] * conf[w][c][c]).sum())
        .collect();
    finish(&d, post, skills, ll_trace)
}

/// Krippendorff's nominal α by enumerating value pairs.
pub fn alpha_oracle(records: &[Record]) -> f64 {
    let mut units: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (t, _, l) in records {
        units.entry(t.as_str()).or_default().push(l.as_str());
    }
    let pairable: Vec<Vec<&str>> = units.into_values().filter(|v| v.len() >= 2).collect();
    let n: usize = pairable.iter().map(Vec::len).sum();
    let mut observed = 0.0;
    for values in &pairable {
        let m = values.len() as f64;
        for i in 0..values.len() {
            for j in 0..values.len() {
                if i != j && values[i] != values[j] {
                    observed += 1.0 / (m - 1.0);
                }
            }
        }
    }
    let all: Vec<&str> = pairable.iter().flatten().copied().collect();
    let mut expected = 0.0;
    for i in 0..all.len() {
        for j in 0..all.len() {
            if i != j && all[i] != all[j] {
                expected += 1.0;
            }
        }
    }
    let d_o = observed / n as f64;
    let d_e = expected / (n as f64 * (n as f64 - 1.0));
    1.0 - d_o / d_e
}

/// Word-level Levenshtein distance by memoized recursion.
pub fn edit_oracle(a: &[String], b: &[String]) -> usize {
    fn go(a: &[String], b: &[String], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j + 1, memo)
                .min(go(a, b, i + 1, j, memo))
                .min(go(a, b, i, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

pub fn wer_oracle(hyp: &[String], reference: &[String]) -> f64 {
    if reference.is_empty() {
        return hyp.len() as f64;
    }
    edit_oracle(hyp, reference) as f64 / reference.len() as f64
}

pub fn iou_oracle(a: &Mask, b: &Mask) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for r in 0..a.height() {
        for c in 0..a.width() {
            let (x, y) = (a.get(r, c), b.get(r, c));
            inter += usize::from(x && y);
            union += usize::from(x || y);
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Spearman's ρ with ranks counted pairwise.
pub fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let below = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx).powi(2);
        syy += (ry[i] - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Random response table: every task gets at least one response.
pub fn random_records(rng: &mut Rng, max_workers: usize, max_tasks: usize, max_labels: usize) -> Vec<Record> {
    let n_workers = rng.random_range(1..=max_workers);
    let n_tasks = rng.random_range(1..=max_tasks);
    let n_labels = rng.random_range(2..=max_labels);
    let mut records = Vec::new();
    for t in 0..n_tasks {
        let first = rng.random_range(0..n_workers);
        for w in 0..n_workers {
            if w == first || rng.random_bool(0.6) {
                records.push((
                    format!("t{t}"),
                    format!("w{w}"),
                    format!("l{}", rng.random_range(0..n_labels)),
                ));
            }
        }
    }
    records
}

pub fn random_mask(rng: &mut Rng, h: usize, w: usize, density: f64) -> Mask {
    Mask::from_fn(h, w, |_, _| rng.random_bool(density))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

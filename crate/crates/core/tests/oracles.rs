mod common;

use std::collections::BTreeMap;

use common::*;
use crowdinfer::categorical::{dawid_skene, majority_vote, wawa, CategoricalParams};
use crowdinfer::data::{tokenize, AnnotationTable};
use crowdinfer::metrics::{accuracy, iou, spearman_rho, wer};
use crowdinfer::quality::{agreement_with_aggregate, ds_posterior_quality, krippendorff_alpha, uncertainty, Distance};
use crowdinfer::synth::{gen_categorical, CategoricalSpec};
use crowdinfer::util::rng;
use rand::Rng as _;

fn table(records: &[Record]) -> AnnotationTable {
    AnnotationTable::from_records(records.iter().map(|(t, w, l)| (t, w, l))).unwrap()
}

#[test]
fn dawid_skene_matches_naive_em_on_5x30() {
    let mut r = rng(17);
    let mut records = Vec::new();
    let skill = [0.9, 0.8, 0.7, 0.6, 0.55];
    for t in 0..30 {
        let truth = r.random_range(0..2);
        for (w, s) in skill.iter().enumerate() {
            let l = if r.random_bool(*s) { truth } else { 1 - truth };
            records.push((format!("t{t:02}"), format!("w{w}"), format!("{l}")));
        }
    }
    let params = CategoricalParams { n_iter: 25, tol: 0.0, ..CategoricalParams::default() };
    let got = dawid_skene(&table(&records), &params);
    let want = ds_oracle(&records, 25, params.smoothing);
    assert_eq!(got.labels, want.labels);
    let ll = got.trace.log_likelihood.unwrap();
    assert_eq!(ll.len(), 25);
    assert!(max_abs_diff(&ll, &want.log_likelihood) < 1e-9);
    for (t, p) in got.posteriors.unwrap() {
        assert!(max_abs_diff(&p, &want.posteriors[&t]) < 1e-9);
    }
}

#[test]
fn majority_vote_matches_counting_on_1000_tasks() {
    let spec = CategoricalSpec {
        n_labels: 4,
        ..CategoricalSpec::binary_beta(1000, 40, 3)
    };
    let t = gen_categorical(&spec).unwrap().table;
    let records: Vec<Record> = t.records().map(|(a, b, c)| (a.into(), b.into(), c.into())).collect();
    assert_eq!(majority_vote(&t).labels, mv_oracle(&records).labels);
}

#[test]
fn tiny_tables_agree_with_oracles() {
    let mut r = rng(99);
    for _ in 0..50 {
        let records = random_records(&mut r, 5, 10, 3);
        let t = table(&records);
        let mv = majority_vote(&t);
        let mv_o = mv_oracle(&records);
        assert_eq!(mv.labels, mv_o.labels);
        let wa = wawa(&t);
        let wa_o = wawa_oracle(&records);
        assert_eq!(wa.labels, wa_o.labels);
        for (w, s) in wa.skills.unwrap() {
            assert!((s - wa_o.skills[&w]).abs() < 1e-12);
        }
        let params = CategoricalParams { n_iter: 10, tol: 0.0, ..CategoricalParams::default() };
        let ds = dawid_skene(&t, &params);
        let ds_o = ds_oracle(&records, 10, params.smoothing);
        assert_eq!(ds.labels, ds_o.labels);
        for (task, p) in ds.posteriors.unwrap() {
            assert!(max_abs_diff(&p, &ds_o.posteriors[&task]) < 1e-9);
        }
    }
}

#[test]
fn alpha_matches_pair_counting() {
    // two workers disagreeing on both of two balanced binary tasks
    let records: Vec<Record> = [("t1", "a", "0"), ("t1", "b", "1"), ("t2", "a", "1"), ("t2", "b", "0")]
        .iter()
        .map(|(t, w, l)| (t.to_string(), w.to_string(), l.to_string()))
        .collect();
    let got = krippendorff_alpha(&table(&records), &Distance::Nominal).unwrap().value;
    assert!((got - alpha_oracle(&records)).abs() < 1e-12);

    let mut r = rng(5);
    let mut checked = 0;
    while checked < 50 {
        let records = random_records(&mut r, 5, 10, 3);
        let t = table(&records);
        match krippendorff_alpha(&t, &Distance::Nominal) {
            Ok(a) if !a.degenerate => {
                assert!((a.value - alpha_oracle(&records)).abs() < 1e-12);
                checked += 1;
            }
            _ => {}
        }
    }
}

#[test]
fn wer_matches_recursive_edit_distance() {
    let mut r = rng(8);
    let vocab = ["a", "b", "c", "d"];
    for _ in 0..200 {
        let (hl, rl) = (r.random_range(0..8), r.random_range(1..8));
        let mut words = |n: usize| -> Vec<String> {
            (0..n).map(|_| vocab[r.random_range(0..4)].to_string()).collect()
        };
        let (h, rf) = (words(hl), words(rl));
        assert_eq!(wer(&h, &rf), wer_oracle(&h, &rf));
    }
    assert_eq!(wer(&tokenize("a b x d"), &tokenize("a b c d")), 0.25);
    // not symmetric
    let (x, y) = (tokenize("a b c"), tokenize("a"));
    assert_ne!(wer(&x, &y), wer(&y, &x));
}

#[test]
fn iou_matches_popcount() {
    let mut r = rng(4);
    for _ in 0..100 {
        let a = random_mask(&mut r, 7, 9, 0.3);
        let b = random_mask(&mut r, 7, 9, 0.3);
        assert_eq!(iou(&a, &b).unwrap(), iou_oracle(&a, &b));
        assert_eq!(iou(&a, &b).unwrap(), iou(&b, &a).unwrap());
    }
}

#[test]
fn spearman_matches_brute_ranks_with_ties() {
    let mut r = rng(6);
    for _ in 0..100 {
        let n = r.random_range(3..15);
        let x: Vec<f64> = (0..n).map(|_| f64::from(r.random_range(0..4u8))).collect();
        let y: Vec<f64> = (0..n).map(|_| f64::from(r.random_range(0..4u8))).collect();
        if x.iter().all(|v| *v == x[0]) || y.iter().all(|v| *v == y[0]) {
            continue;
        }
        let to_map = |v: &[f64]| -> BTreeMap<String, f64> {
            v.iter().enumerate().map(|(i, s)| (format!("i{i:02}"), *s)).collect()
        };
        let got = spearman_rho(&to_map(&x), &to_map(&y)).unwrap();
        assert!((got - spearman_oracle(&x, &y)).abs() < 1e-12);
    }
}

#[test]
fn accuracy_matches_recount() {
    let mut r = rng(12);
    let mut pred = BTreeMap::new();
    let mut truth = BTreeMap::new();
    let mut hits = 0;
    for t in 0..1000 {
        let (a, b) = (r.random_range(0..3), r.random_range(0..3));
        hits += usize::from(a == b);
        pred.insert(format!("t{t}"), a.to_string());
        truth.insert(format!("t{t}"), b.to_string());
    }
    assert_eq!(accuracy(&pred, &truth).unwrap(), hits as f64 / 1000.0);
}

#[test]
fn agreement_matches_recount() {
    let mut r = rng(13);
    for _ in 0..20 {
        let records = random_records(&mut r, 6, 20, 3);
        let mv = mv_oracle(&records);
        let hits = records.iter().filter(|(t, _, l)| &mv.labels[t] == l).count();
        let got = agreement_with_aggregate(&table(&records));
        assert!((got - hits as f64 / records.len() as f64).abs() < 1e-12);
    }
}

#[test]
fn weighted_uncertainty_by_hand() {
    let t = AnnotationTable::from_records([("t", "a", "x"), ("t", "b", "y"), ("t", "c", "z")]).unwrap();
    let skills: BTreeMap<String, f64> = [("a", 2.0), ("b", 1.0), ("c", 1.0)]
        .iter()
        .map(|(w, s)| (w.to_string(), *s))
        .collect();
    let p: [f64; 3] = [0.5, 0.25, 0.25];
    let want: f64 = -p.iter().map(|v| v * v.ln()).sum::<f64>();
    assert!((uncertainty(&t, Some(&skills)).per_task["t"] - want).abs() < 1e-12);
}

#[test]
fn posterior_quality_is_mean_max_posterior() {
    let mut r = rng(14);
    let records = random_records(&mut r, 5, 10, 3);
    let result = dawid_skene(&table(&records), &CategoricalParams::default());
    let posts = result.posteriors.clone().unwrap();
    let want: f64 = posts.values().map(|p| p.iter().cloned().fold(0.0, f64::max)).sum::<f64>() / posts.len() as f64;
    assert!((ds_posterior_quality(&result).unwrap() - want).abs() < 1e-12);
}

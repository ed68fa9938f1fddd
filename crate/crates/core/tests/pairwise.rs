use std::collections::BTreeMap;

use crowdinfer::data::PairwiseTable;
use crowdinfer::metrics::spearman_rho;
use crowdinfer::pairwise::noisy_bt as nbt;
use crowdinfer::pairwise::{bradley_terry, noisy_bt, random_baseline, PairwiseParams};
use crowdinfer::synth::{gen_pairwise, PairwiseSpec, ScoreDist};
use crowdinfer::util::{rng, sigmoid};
use rand::Rng;

fn tournament(n_items: usize, n_comparisons: usize, noise: f64, seed: u64) -> (PairwiseTable, BTreeMap<String, f64>) {
    let data = gen_pairwise(&PairwiseSpec {
        n_items,
        n_workers: 10,
        n_comparisons,
        scores: ScoreDist::Normal { mean: 0.0, std: 1.0 },
        worker_noise: noise,
        seed,
    })
    .unwrap();
    (data.table, data.truth)
}

#[test]
fn bt_recovers_known_strengths() {
    let (table, truth) = tournament(20, 1000, 0.0, 21);
    let result = bradley_terry(&table, &PairwiseParams::default()).unwrap();
    let rho = spearman_rho(&result.scores, &truth).unwrap();
    assert!(rho >= 0.9, "rho {rho}");
}

#[test]
fn bt_objective_never_decreases() {
    for seed in 0..20 {
        // sparse tables are often not strongly connected, exercising the pseudo-item
        let n_comparisons = if seed % 2 == 0 { 15 } else { 400 };
        let (table, _) = tournament(12, n_comparisons, 0.2, seed);
        let result = bradley_terry(&table, &PairwiseParams::default()).unwrap();
        let ll = result.trace.log_likelihood.unwrap();
        for pair in ll.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12, "seed {seed}: {} -> {}", pair[0], pair[1]);
        }
    }
}

#[test]
fn noisy_bt_gradient_matches_finite_differences() {
    let mut r = rng(8);
    let items = ["a", "b", "c", "d", "e"];
    let records: Vec<(String, String, String, String)> = (0..40)
        .map(|_| {
            let worker = ["w1", "w2"][r.random_range(0..2)];
            let i = r.random_range(0..5);
            let j = (i + r.random_range(1..5)) % 5;
            let winner = if r.random::<bool>() { items[i] } else { items[j] };
            (worker.into(), items[i].into(), items[j].into(), winner.into())
        })
        .collect();
    let table = PairwiseTable::from_records(records).unwrap();
    let mut state = nbt::State::initial(&table, 3);
    for (i, s) in state.scores.iter_mut().enumerate() {
        *s += 0.3 * i as f64 - 0.5;
    }
    state.reliability_logit = vec![0.4, -0.7];
    state.bias = vec![0.2, -0.3];
    let l2 = 0.05;
    let analytic = nbt::gradient(&table, &state, l2);
    let eps = 1e-5;
    let check = |get: &dyn Fn(&mut nbt::State) -> &mut f64, g: f64, what: &str| {
        let mut plus = state.clone();
        *get(&mut plus) += eps;
        let mut minus = state.clone();
        *get(&mut minus) -= eps;
        let fd = (nbt::objective(&table, &plus, l2) - nbt::objective(&table, &minus, l2)) / (2.0 * eps);
        let rel = (fd - g).abs() / fd.abs().max(g.abs()).max(1e-8);
        assert!(rel < 1e-4, "{what}: analytic {g} vs numeric {fd}");
    };
    for i in 0..5 {
        check(&|s| &mut s.scores[i], analytic.scores[i], "score");
    }
    for w in 0..2 {
        check(&|s| &mut s.reliability_logit[w], analytic.reliability_logit[w], "reliability");
        check(&|s| &mut s.bias[w], analytic.bias[w], "bias");
    }
}

#[test]
fn coin_flip_worker_is_less_reliable() {
    let mut r = rng(17);
    let n = 30;
    let scores: Vec<f64> = (0..n).map(|i| i as f64 * 0.15).collect();
    let name = |i: usize| format!("i{i:02}");
    let mut records = Vec::new();
    for k in 0..4000 {
        let i = r.random_range(0..n);
        let j = (i + r.random_range(1..n)) % n;
        let (worker, left_wins) = if k % 2 == 0 {
            ("faithful", r.random::<f64>() < sigmoid(scores[i] - scores[j]))
        } else {
            ("coin", r.random::<bool>())
        };
        let winner = if left_wins { name(i) } else { name(j) };
        records.push((worker.to_string(), name(i), name(j), winner));
    }
    let table = PairwiseTable::from_records(records).unwrap();
    let params = PairwiseParams {
        n_iter: 1000,
        ..PairwiseParams::default()
    };
    let wp = noisy_bt(&table, &params).unwrap().worker_params.unwrap();
    assert!(
        wp["faithful"].reliability > wp["coin"].reliability,
        "{:?}",
        wp
    );
}

#[test]
fn swapping_sides_keeps_bt_and_flips_noisy_bias() {
    let (table, _) = tournament(15, 600, 0.3, 5);
    // give one worker a left-side habit so the bias is not zero
    let records: Vec<(String, String, String, String)> = table
        .records()
        .enumerate()
        .map(|(k, (w, l, r, win))| {
            let win = if w == "w0" && k % 3 == 0 { l } else { win };
            (w.to_string(), l.to_string(), r.to_string(), win.to_string())
        })
        .collect();
    let swapped: Vec<_> = records
        .iter()
        .map(|(w, l, r, win)| (w.clone(), r.clone(), l.clone(), win.clone()))
        .collect();
    let a = PairwiseTable::from_records(records).unwrap();
    let b = PairwiseTable::from_records(swapped).unwrap();
    let params = PairwiseParams::default();

    let (bt_a, bt_b) = (bradley_terry(&a, &params).unwrap(), bradley_terry(&b, &params).unwrap());
    for (item, s) in &bt_a.scores {
        assert!((s - bt_b.scores[item]).abs() < 1e-12, "{item}");
    }

    let (na, nb) = (noisy_bt(&a, &params).unwrap(), noisy_bt(&b, &params).unwrap());
    for (item, s) in &na.scores {
        assert!((s - nb.scores[item]).abs() < 1e-9, "{item}");
    }
    let (wa, wb) = (na.worker_params.unwrap(), nb.worker_params.unwrap());
    assert!(wa["w0"].bias.abs() > 1e-3);
    for (worker, p) in &wa {
        assert!((p.bias + wb[worker].bias).abs() < 1e-9, "{worker}");
        assert!((p.reliability - wb[worker].reliability).abs() < 1e-9, "{worker}");
    }
}

#[test]
fn random_baseline_is_uncorrelated_on_500_items() {
    let (table, _) = tournament(500, 3000, 0.0, 1);
    let truth: BTreeMap<String, f64> = table
        .items()
        .iter()
        .enumerate()
        .map(|(i, item)| (item.clone(), i as f64))
        .collect();
    let within = (0..1000)
        .filter(|&seed| {
            let result = random_baseline(&table, seed);
            spearman_rho(&result.scores, &truth).unwrap().abs() < 0.1
        })
        .count();
    assert!(within >= 950, "{within} of 1000 seeds");
}

#[test]
fn pure_noise_gives_no_ranking() {
    let (table, truth) = tournament(200, 6000, 1.0, 7);
    let result = bradley_terry(&table, &PairwiseParams::default()).unwrap();
    let rho = spearman_rho(&result.scores, &truth).unwrap();
    assert!(rho.abs() < 0.2, "rho {rho}");
}

#[test]
fn ranking_ignores_a_shift_of_scores() {
    let (table, _) = tournament(25, 500, 0.1, 9);
    let result = noisy_bt(&table, &PairwiseParams::default()).unwrap();
    let mut shifted: Vec<(&String, f64)> = result.scores.iter().map(|(k, v)| (k, v + 123.0)).collect();
    shifted.sort_by(|a, b| b.1.total_cmp(&a.1));
    let order: Vec<&String> = shifted.into_iter().map(|(k, _)| k).collect();
    assert_eq!(order, result.ranking.iter().collect::<Vec<_>>());
    assert_eq!(result.ranking.len(), table.items().len());
}

#[test]
fn transitive_single_worker() {
    let table = PairwiseTable::from_records([
        ("w", "a", "b", "a"),
        ("w", "b", "c", "b"),
        ("w", "a", "c", "a"),
    ])
    .unwrap();
    let result = noisy_bt(&table, &PairwiseParams::default()).unwrap();
    assert_eq!(result.ranking, ["a", "b", "c"]);
}

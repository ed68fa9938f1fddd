//! End-to-end acceptance checks. Prints one PASS/FAIL/SKIPPED line per criterion
//! and exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use crowdinfer::bench::{run_bench, BenchConfig, CellStatus, DATA_DIR_ENV};
use crowdinfer::categorical::{dawid_skene, majority_vote, wawa, CategoricalParams};
use crowdinfer::data::{write_annotations, AnnotationTable, Catalog, Dataset, Mask, MaskSet, SequenceTable};
use crowdinfer::methods::{self, Method, MethodOptions, Metric};
use crowdinfer::metrics::{corpus_wer, iou, mean_iou, spearman_rho, wer};
use crowdinfer::pairwise::{bradley_terry, noisy_bt, random_baseline, PairwiseParams};
use crowdinfer::quality::{krippendorff_alpha, uncertainty, Distance};
use crowdinfer::segmentation::{seg_em, seg_majority_vote};
use crowdinfer::sequence::{hrrasa, rasa, rover_table, TrigramTfIdf};
use crowdinfer::synth::*;
use crowdinfer::util::{rng, sha256_hex};
use rand::seq::index::sample;
use rand::Rng as _;

const FROZEN_FIXTURE_SHA256: &str = "ecd00db48563361d586faae35e893a655261c17562ebd32487feaca446552cf8";

enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

use Outcome::*;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn within(budget: Duration, start: Instant, detail: &mut String) -> bool {
    let spent = start.elapsed();
    detail.push_str(&format!("; {:.1}s of {}s", spent.as_secs_f64(), budget.as_secs()));
    spent <= budget
}

fn table(records: &[Record]) -> AnnotationTable {
    AnnotationTable::from_records(records.iter().map(|(t, w, l)| (t, w, l))).unwrap()
}

fn monotone(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|p| p[1] >= p[0] - slack)
}

fn em_correctness() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2024);
    let mut ds_bad = 0;
    for _ in 0..100 {
        let records = random_records(&mut r, 50, 200, 4);
        let params = CategoricalParams { n_iter: 50, tol: 0.0, ..CategoricalParams::default() };
        let ll = dawid_skene(&table(&records), &params).trace.log_likelihood.unwrap();
        ds_bad += usize::from(!monotone(&ll, 1e-9));
    }
    let mut seg_bad = 0;
    for k in 0..30 {
        let data = gen_segmentation(&SegmentationSpec {
            n_tasks: 1,
            n_workers: r.random_range(2..10),
            shape: if k % 2 == 0 { Shape::Ellipse } else { Shape::Rect },
            flip_rate: r.random_range(0.0..0.4),
            morph_noise: r.random_range(0..3),
            height: 24,
            width: 24,
            seed: k,
        })
        .unwrap();
        let ll = seg_em(&data.masks[0], 20, 0.01).unwrap().trace.log_likelihood.unwrap();
        seg_bad += usize::from(!monotone(&ll, 1e-9));
    }
    let mut bt_bad = 0;
    for seed in 0..30 {
        let data = gen_pairwise(&PairwiseSpec {
            n_items: 15,
            n_workers: 5,
            n_comparisons: if seed % 2 == 0 { 20 } else { 500 },
            scores: ScoreDist::Normal { mean: 0.0, std: 1.0 },
            worker_noise: 0.2,
            seed,
        })
        .unwrap();
        let ll = bradley_terry(&data.table, &PairwiseParams::default()).unwrap().trace.log_likelihood.unwrap();
        bt_bad += usize::from(!monotone(&ll, 1e-12));
    }
    let mut detail = format!("non-monotone traces: DS {ds_bad}/100, seg-EM {seg_bad}/30, BT {bt_bad}/30");
    let fast = within(Duration::from_secs(30), start, &mut detail);
    verdict(ds_bad + seg_bad + bt_bad == 0 && fast, detail)
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng(25);
    let mut mismatches = Vec::new();
    let mut alpha_checked = 0;
    for i in 0..25 {
        let records = random_records(&mut r, 5, 10, 3);
        let t = table(&records);
        if majority_vote(&t).labels != mv_oracle(&records).labels {
            mismatches.push(format!("MV #{i}"));
        }
        let wa = wawa(&t);
        let wa_o = wawa_oracle(&records);
        let wa_skills = wa.skills.unwrap();
        if wa.labels != wa_o.labels || wa_skills.iter().any(|(w, s)| (s - wa_o.skills[w]).abs() > 1e-9) {
            mismatches.push(format!("Wawa #{i}"));
        }
        let params = CategoricalParams { n_iter: 10, tol: 0.0, ..CategoricalParams::default() };
        let ds = dawid_skene(&t, &params);
        let ds_o = ds_oracle(&records, 10, params.smoothing);
        let post_ok = ds
            .posteriors
            .as_ref()
            .unwrap()
            .iter()
            .all(|(task, p)| max_abs_diff(p, &ds_o.posteriors[task]) <= 1e-9);
        if ds.labels != ds_o.labels || !post_ok {
            mismatches.push(format!("DS #{i}"));
        }
        if let Ok(a) = krippendorff_alpha(&t, &Distance::Nominal) {
            if !a.degenerate {
                alpha_checked += 1;
                if (a.value - alpha_oracle(&records)).abs() > 1e-9 {
                    mismatches.push(format!("alpha #{i}"));
                }
            }
        }

        let vocab = ["a", "b", "c", "d"];
        let (hl, rl) = (r.random_range(0..8), r.random_range(1..8));
        let h: Vec<String> = (0..hl).map(|_| vocab[r.random_range(0..4)].to_string()).collect();
        let rf: Vec<String> = (0..rl).map(|_| vocab[r.random_range(0..4)].to_string()).collect();
        if wer(&h, &rf) != wer_oracle(&h, &rf) {
            mismatches.push(format!("WER #{i}"));
        }

        let (a, b) = (random_mask(&mut r, 6, 8, 0.4), random_mask(&mut r, 6, 8, 0.4));
        if iou(&a, &b).unwrap() != iou_oracle(&a, &b) {
            mismatches.push(format!("IoU #{i}"));
        }

        let n = r.random_range(4..12);
        let x: Vec<f64> = (0..n).map(|k| f64::from(r.random_range(0..4u8)) + if k == 0 { 10.0 } else { 0.0 }).collect();
        let y: Vec<f64> = (0..n).map(|k| f64::from(r.random_range(0..4u8)) + if k == 1 { 10.0 } else { 0.0 }).collect();
        let to_map = |v: &[f64]| -> BTreeMap<String, f64> {
            v.iter().enumerate().map(|(i, s)| (format!("i{i:02}"), *s)).collect()
        };
        if (spearman_rho(&to_map(&x), &to_map(&y)).unwrap() - spearman_oracle(&x, &y)).abs() > 1e-9 {
            mismatches.push(format!("Spearman #{i}"));
        }
    }
    verdict(
        mismatches.is_empty() && alpha_checked > 0,
        format!(
            "25 instances x 7 quantities, alpha checked on {alpha_checked}; mismatches: {}",
            if mismatches.is_empty() { "none".into() } else { mismatches.join(", ") }
        ),
    )
}

fn accuracy_of(method: Method, dataset: &Dataset) -> Result<f64, String> {
    let out = methods::run(method, dataset.input(), &MethodOptions::default()).map_err(|e| e.to_string())?;
    methods::evaluate(Metric::Accuracy, &out, dataset).map_err(|e| e.to_string())
}

fn desk_ordering() -> Outcome {
    let start = Instant::now();
    let fixture = gen_categorical(&CategoricalSpec::binary_beta(1000, 100, 42)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("crowd_labels.csv");
    write_annotations(&path, &fixture.table).unwrap();
    let hash = sha256_hex(&std::fs::read(&path).unwrap());
    if hash != FROZEN_FIXTURE_SHA256 {
        return Fail(format!("fixture checksum changed: {hash}"));
    }
    let dataset = Dataset::Categorical { table: fixture.table, truth: fixture.truth };
    let mut acc = BTreeMap::new();
    for m in [Method::Mv, Method::Wawa, Method::Ds, Method::Glad, Method::Mace, Method::Kos, Method::Mmsr] {
        match accuracy_of(m, &dataset) {
            Ok(a) => {
                acc.insert(m, a);
            }
            Err(e) => return Fail(format!("{} failed: {e}", m.display_name())),
        }
    }
    let ds = acc[&Method::Ds];
    let mut ok = ds >= acc[&Method::Wawa] && acc[&Method::Wawa] >= acc[&Method::Mv] - 0.005 && ds >= 0.95;
    for m in [Method::Glad, Method::Mace, Method::Kos, Method::Mmsr] {
        ok &= (acc[&m] - ds).abs() <= 0.02;
    }
    let mut detail = acc
        .iter()
        .map(|(m, a)| format!("{} {a:.3}", m.display_name()))
        .collect::<Vec<_>>()
        .join(", ");
    let fast = within(Duration::from_secs(60), start, &mut detail);
    verdict(ok && fast, detail)
}

/// Published accuracies; `None` where the method has no value for the dataset.
const PUBLISHED: [(&str, [Option<f64>; 7]); 6] = [
    ("d-product", [Some(0.897), Some(0.897), Some(0.940), Some(0.928), Some(0.895), Some(0.929), None]),
    ("d-possent", [Some(0.932), Some(0.951), Some(0.960), Some(0.948), Some(0.933), Some(0.950), Some(0.937)]),
    ("s-rel", [Some(0.536), Some(0.557), Some(0.615), Some(0.511), None, Some(0.501), Some(0.425)]),
    ("s-adult", [Some(0.763), Some(0.766), Some(0.748), Some(0.760), None, Some(0.763), Some(0.751)]),
    ("binary1", [Some(0.931), Some(0.981), Some(0.994), Some(0.994), Some(0.993), Some(0.995), Some(0.994)]),
    ("binary2", [Some(0.936), Some(0.983), Some(0.994), Some(0.994), Some(0.994), Some(0.995), Some(0.994)]),
];
const PUBLISHED_METHODS: [Method; 7] =
    [Method::Mv, Method::Wawa, Method::Ds, Method::Glad, Method::Kos, Method::Mace, Method::Mmsr];

fn published_reproduction(config_dir: &Path) -> Outcome {
    let Some(root) = std::env::var_os(DATA_DIR_ENV) else {
        return Skipped(format!("{DATA_DIR_ENV} not set; external datasets not supplied"));
    };
    let root = Path::new(&root);
    let catalog = Catalog::builtin();
    let missing: Vec<&str> = PUBLISHED
        .iter()
        .map(|(name, _)| *name)
        .filter(|name| {
            let entry = catalog.get(name).unwrap();
            !entry.files().iter().all(|f| root.join(name).join(f).is_file())
        })
        .collect();
    if !missing.is_empty() {
        return Skipped(format!("missing under {}: {}", root.display(), missing.join(", ")));
    }
    let config = match BenchConfig::from_path(&config_dir.join("public-categorical.bench")) {
        Ok(c) => c,
        Err(e) => return Fail(format!("config: {e}")),
    };
    let report = match run_bench(&config) {
        Ok(r) => r,
        Err(e) => return Fail(e.to_string()),
    };
    let mut off = Vec::new();
    for (dataset, row) in PUBLISHED {
        for (method, published) in PUBLISHED_METHODS.iter().zip(row) {
            let cell = report.cell(dataset, *method).unwrap();
            match (&cell.status, published) {
                (CellStatus::Ok(values), Some(p)) => {
                    let ours = values[&Metric::Accuracy];
                    if (ours - p).abs() > 0.015 {
                        off.push(format!("{dataset}/{}: {ours:.3} vs {p:.3}", method.display_name()));
                    }
                }
                (CellStatus::Skipped(_), None) => {}
                // the published grid has no value here; ours is reported but not compared
                (CellStatus::Ok(_), None) if *method != Method::Kos => {}
                (status, _) => off.push(format!("{dataset}/{}: {status:?}", method.display_name())),
            }
        }
    }
    verdict(
        off.is_empty(),
        if off.is_empty() { "all cells within 0.015".into() } else { off.join("; ") },
    )
}

fn pairwise_tournament() -> Outcome {
    let start = Instant::now();
    let data = gen_pairwise(&PairwiseSpec {
        n_items: 200,
        n_workers: 30,
        n_comparisons: 6000,
        scores: ScoreDist::Normal { mean: 0.0, std: 1.0 },
        worker_noise: 0.2,
        seed: 7,
    })
    .unwrap();
    let params = PairwiseParams::default();
    let bt = spearman_rho(&bradley_terry(&data.table, &params).unwrap().scores, &data.truth).unwrap();
    let nbt = spearman_rho(&noisy_bt(&data.table, &params).unwrap().scores, &data.truth).unwrap();
    let rhos: Vec<f64> = (0..100)
        .map(|s| spearman_rho(&random_baseline(&data.table, s).scores, &data.truth).unwrap())
        .collect();
    let mean = rhos.iter().sum::<f64>() / 100.0;
    let mean_abs = rhos.iter().map(|r| r.abs()).sum::<f64>() / 100.0;
    let mut detail = format!("rho BT {bt:.3}, noisyBT {nbt:.3}; random mean {mean:.4}, mean |rho| {mean_abs:.4}");
    let fast = within(Duration::from_secs(30), start, &mut detail);
    verdict(bt >= 0.8 && nbt >= 0.8 && mean.abs() <= 0.1 && mean_abs <= 0.1 && fast, detail)
}

fn worker_corpus_wer(table: &SequenceTable, truth: &BTreeMap<String, Vec<String>>) -> Vec<f64> {
    table
        .workers()
        .iter()
        .map(|w| {
            let pred: BTreeMap<String, Vec<String>> = table
                .rows()
                .iter()
                .filter(|r| &r.worker == w)
                .map(|r| (r.task.clone(), r.tokens.clone()))
                .collect();
            corpus_wer(&pred, truth).unwrap()
        })
        .collect()
}

fn sequence_benchmark() -> Outcome {
    let start = Instant::now();
    let data = gen_sequence(&SequenceSpec::new(100, 7, 0.10, 3)).unwrap();
    let mut workers = worker_corpus_wer(&data.table, &data.truth);
    workers.sort_by(f64::total_cmp);
    let mean = workers.iter().sum::<f64>() / workers.len() as f64;
    let median = workers[workers.len() / 2];
    let embedder = TrigramTfIdf::default();
    let rover = corpus_wer(&rover_table(&data.table).unwrap().labels, &data.truth).unwrap();
    let rasa = corpus_wer(&rasa(&data.table, &embedder, 10).labels, &data.truth).unwrap();
    let hr = corpus_wer(&hrrasa(&data.table, &embedder, 10, 0.5).labels, &data.truth).unwrap();
    let mut detail = format!(
        "WER ROVER {rover:.4}, RASA {rasa:.4}, HRRASA {hr:.4}; workers mean {mean:.4}, median {median:.4}"
    );
    let fast = within(Duration::from_secs(30), start, &mut detail);
    verdict(rover < mean && rasa <= median && hr <= median && fast, detail)
}

fn segmentation_benchmark() -> Outcome {
    let start = Instant::now();
    let data = gen_segmentation(&SegmentationSpec {
        n_tasks: 100,
        n_workers: 9,
        shape: Shape::Ellipse,
        flip_rate: 0.1,
        morph_noise: 1,
        height: 64,
        width: 64,
        seed: 5,
    })
    .unwrap();
    let fuse = |f: &dyn Fn(&MaskSet) -> Mask| -> BTreeMap<String, Mask> {
        data.masks.iter().map(|s| (s.task().to_owned(), f(s))).collect()
    };
    let mv = mean_iou(&fuse(&|s| seg_majority_vote(s).unwrap()), &data.truth).unwrap();
    let em = mean_iou(&fuse(&|s| seg_em(s, 10, 0.01).unwrap().mask), &data.truth).unwrap();
    let mut worker_total = 0.0;
    for set in &data.masks {
        let truth = &data.truth[set.task()];
        worker_total += set.masks().iter().map(|(_, m)| iou(m, truth).unwrap()).sum::<f64>() / set.len() as f64;
    }
    let workers = worker_total / data.masks.len() as f64;
    let mut detail = format!("IoU EM {em:.4}, MV {mv:.4}, mean worker {workers:.4}");
    let fast = within(Duration::from_secs(60), start, &mut detail);
    verdict(em >= mv && mv >= workers && em >= workers && fast, detail)
}

fn metric_pins() -> Outcome {
    let mut failures = Vec::new();
    let perfect = AnnotationTable::from_records(
        (0..20).flat_map(|t| (0..3).map(move |w| (format!("t{t}"), format!("w{w}"), ["a", "b"][t % 2].to_string()))),
    )
    .unwrap();
    let a1 = krippendorff_alpha(&perfect, &Distance::Nominal).unwrap().value;
    if a1 != 1.0 {
        failures.push(format!("perfect alpha {a1}"));
    }

    let mut r = rng(100_000);
    let mut records = Vec::with_capacity(100_000);
    for t in 0..20_000 {
        for w in sample(&mut r, 50, 5) {
            records.push((format!("t{t}"), format!("w{w}"), ["a", "b", "c"][r.random_range(0..3)].to_string()));
        }
    }
    let random_alpha = krippendorff_alpha(&AnnotationTable::from_records(records).unwrap(), &Distance::Nominal)
        .unwrap()
        .value;
    if random_alpha.abs() >= 0.05 {
        failures.push(format!("random alpha {random_alpha}"));
    }

    let split = AnnotationTable::from_records([("t", "w1", "a"), ("t", "w2", "b")]).unwrap();
    let h = uncertainty(&split, None).per_task["t"];
    if (h - 2f64.ln()).abs() > 1e-12 {
        failures.push(format!("50/50 uncertainty {h}"));
    }

    let toks = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
    let w = wer(&toks("a b x d"), &toks("a b c d"));
    if w != 0.25 {
        failures.push(format!("WER {w}"));
    }

    let m = Mask::from_fn(8, 8, |y, x| (x + y) % 3 == 0);
    let i = iou(&m, &m).unwrap();
    if i != 1.0 {
        failures.push(format!("IoU {i}"));
    }
    verdict(
        failures.is_empty(),
        format!(
            "alpha perfect {a1}, alpha random {random_alpha:.4}, H(50/50) {h:.6}, WER {w}, IoU {i}{}",
            if failures.is_empty() { String::new() } else { format!("; off: {}", failures.join(", ")) }
        ),
    )
}

fn determinism_and_scale(config_dir: &Path) -> Outcome {
    let mut config = match BenchConfig::from_path(&config_dir.join("categorical-desk.bench")) {
        Ok(c) => c,
        Err(e) => return Fail(format!("config: {e}")),
    };
    config.parallelism = 1;
    let serial = run_bench(&config).unwrap();
    config.parallelism = 8;
    let parallel = run_bench(&config).unwrap();
    let same = serial.to_csv() == parallel.to_csv() && serial.to_markdown() == parallel.to_markdown();

    let data = gen_categorical(&CategoricalSpec {
        n_tasks: 10_000,
        n_workers: 200,
        per_task: 10,
        n_labels: 10,
        skills: SkillDist::Beta { a: 4.0, b: 2.0 },
        model: WorkerModel::OneCoin,
        seed: 9,
    })
    .unwrap();
    let start = Instant::now();
    let result = dawid_skene(&data.table, &CategoricalParams::default());
    let elapsed = start.elapsed();
    let detail = format!(
        "reports identical at parallelism 1 and 8: {same}; DS on {} responses: {:.2}s ({} iterations)",
        data.table.responses().len(),
        elapsed.as_secs_f64(),
        result.trace.iterations_run
    );
    verdict(same && serial.all_ok() && elapsed < Duration::from_secs(10), detail)
}

fn main() {
    let config_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 EM objectives are monotone", Box::new(em_correctness)),
        ("2 oracle equivalence on tiny instances", Box::new(oracle_equivalence)),
        ("3 categorical ordering on the frozen fixture", Box::new(desk_ordering)),
        ("4 published categorical accuracies", Box::new(|| published_reproduction(&config_dir))),
        ("5 pairwise tournament and random baseline", Box::new(pairwise_tournament)),
        ("6 sequence corruption benchmark", Box::new(sequence_benchmark)),
        ("7 segmentation generator benchmark", Box::new(segmentation_benchmark)),
        ("8 metric pins", Box::new(metric_pins)),
        ("9 determinism and scale", Box::new(|| determinism_and_scale(&config_dir))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skipped(d) => ("SKIPPED", d),
        };
        println!("[{tag}] criterion {name}: {detail}");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

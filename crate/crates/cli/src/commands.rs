use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use crowdinfer::bench::{run_bench, BenchConfig};
use crowdinfer::data::{
    read_categorical, read_ground_truth_labels, read_ground_truth_scores, read_ground_truth_texts,
    read_mask_map, read_masks, read_pairwise, read_sequence, write_labels, write_mask_map,
    write_posteriors, write_rows, write_scores, write_skills, write_texts, ColumnSchema, Modality,
};
use crowdinfer::methods::{self, Input, MethodOptions, Metric, Output};
use crowdinfer::quality::{self, Distance};
use crowdinfer::synth::{
    gen_categorical, gen_pairwise, gen_segmentation, gen_sequence, CategoricalSpec, PairwiseSpec,
    ScoreDist, SegmentationSpec, SequenceSpec, Shape, SkillDist, WorkerModel,
};
use crowdinfer::util::sha256_hex;
use crowdinfer::{metrics as m, Error, Result};

use crate::{AggregateArgs, BenchArgs, Columns, EvaluateArgs, MetricsArgs, ModelArg, ShapeArg, SynthKind};

impl Columns {
    fn schema(&self) -> ColumnSchema {
        ColumnSchema::new(&self.task_col, &self.worker_col, &self.label_col)
    }
}

fn split_output(path: &Path) -> (PathBuf, String) {
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "index.csv".into());
    (dir, name)
}

pub fn aggregate(args: AggregateArgs) -> Result<ExitCode> {
    let opts = MethodOptions {
        n_iter: args.n_iter,
        seed: args.seed,
        params: args.params.into_iter().collect(),
    };
    opts.validate(args.method)?;
    let output = match args.method.modality() {
        Modality::Categorical => {
            let table = read_categorical(&args.input, &args.columns.schema())?;
            methods::run(args.method, Input::Categorical(&table), &opts)?
        }
        Modality::Pairwise => {
            let table = read_pairwise(&args.input)?;
            methods::run(args.method, Input::Pairwise(&table), &opts)?
        }
        Modality::Sequence => {
            let table = read_sequence(&args.input)?;
            methods::run(args.method, Input::Sequence(&table), &opts)?
        }
        Modality::Segmentation => {
            let sets = read_masks(&args.input)?;
            methods::run(args.method, Input::Segmentation(&sets), &opts)?
        }
    };

    match &output {
        Output::Labels(r) => {
            write_labels(&args.output, &r.labels)?;
            if let Some(path) = &args.posteriors {
                write_posteriors(path, r)?;
            }
            if let (Some(path), Some(skills)) = (&args.skills, &r.skills) {
                write_skills(path, skills)?;
            }
        }
        Output::Scores(r) => {
            write_scores(&args.output, &r.scores, &r.ranking)?;
            if let (Some(path), Some(params)) = (&args.skills, &r.worker_params) {
                write_rows(
                    path,
                    &["worker", "reliability", "bias"],
                    params
                        .iter()
                        .map(|(w, p)| [w.clone(), p.reliability.to_string(), p.bias.to_string()]),
                )?;
            }
        }
        Output::Texts(r) => {
            write_texts(&args.output, &r.labels)?;
            if let (Some(path), Some(skills)) = (&args.skills, &r.skills) {
                write_skills(path, skills)?;
            }
        }
        Output::Masks { masks, .. } => {
            let (dir, name) = split_output(&args.output);
            write_mask_map(&dir, &name, masks)?;
        }
    }
    let (iterations, delta) = output.trace_summary();
    eprintln!(
        "{}: {iterations} iterations, final change {delta:.3e}",
        args.method
    );
    Ok(ExitCode::SUCCESS)
}

fn metric_csv(rows: &[(String, f64)], output: Option<&Path>) -> Result<()> {
    println!("metric,value");
    for (name, value) in rows {
        println!("{name},{value}");
    }
    if let Some(path) = output {
        write_rows(
            path,
            &["metric", "value"],
            rows.iter().map(|(n, v)| [n.clone(), v.to_string()]),
        )?;
    }
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let value = match args.metric {
        Metric::Accuracy => m::accuracy(
            &read_ground_truth_labels(&args.predictions, "task", "label")?,
            &read_ground_truth_labels(&args.truth, "task", "label")?,
        )?,
        Metric::Spearman => m::spearman_rho(
            &read_ground_truth_scores(&args.predictions)?,
            &read_ground_truth_scores(&args.truth)?,
        )?,
        Metric::Wer => m::corpus_wer(
            &read_ground_truth_texts(&args.predictions)?,
            &read_ground_truth_texts(&args.truth)?,
        )?,
        Metric::Iou => m::mean_iou(&read_mask_map(&args.predictions)?, &read_mask_map(&args.truth)?)?,
    };
    metric_csv(&[(args.metric.name().to_owned(), value)], args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn files_under(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            files_under(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// Prints `sha256  path` for every generated file.
fn print_checksums(dir: &Path) -> Result<()> {
    let mut files = Vec::new();
    files_under(dir, &mut files)?;
    for path in files {
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        println!("{}  {}", sha256_hex(&bytes), path.display());
    }
    Ok(())
}

pub fn synth(kind: SynthKind) -> Result<ExitCode> {
    let out = match kind {
        SynthKind::Categorical {
            n_tasks,
            n_workers,
            per_task,
            n_labels,
            skill_beta,
            skill_fixed,
            model,
            seed,
            out,
        } => {
            let skills = match (skill_beta, skill_fixed) {
                (_, Some(value)) => SkillDist::Fixed { value },
                (Some((a, b)), None) => SkillDist::Beta { a, b },
                (None, None) => SkillDist::Beta { a: 4.0, b: 1.0 },
            };
            let spec = CategoricalSpec {
                n_tasks,
                n_workers,
                per_task,
                n_labels,
                skills,
                model: match model {
                    ModelArg::OneCoin => WorkerModel::OneCoin,
                    ModelArg::Confusion => WorkerModel::Confusion,
                },
                seed,
            };
            gen_categorical(&spec)?.write_to(&out)?;
            out
        }
        SynthKind::Pairwise {
            n_items,
            n_workers,
            n_comparisons,
            worker_noise,
            score_step,
            seed,
            out,
        } => {
            let spec = PairwiseSpec {
                n_items,
                n_workers,
                n_comparisons,
                scores: match score_step {
                    Some(step) => ScoreDist::Linear { step },
                    None => ScoreDist::Normal { mean: 0.0, std: 1.0 },
                },
                worker_noise,
                seed,
            };
            gen_pairwise(&spec)?.write_to(&out)?;
            out
        }
        SynthKind::Sequence {
            n_tasks,
            n_workers,
            error_rate,
            seed,
            out,
        } => {
            gen_sequence(&SequenceSpec::new(n_tasks, n_workers, error_rate, seed))?.write_to(&out)?;
            out
        }
        SynthKind::Segmentation {
            n_tasks,
            n_workers,
            shape,
            flip_rate,
            morph,
            height,
            width,
            seed,
            out,
        } => {
            let spec = SegmentationSpec {
                n_tasks,
                n_workers,
                shape: match shape {
                    ShapeArg::Ellipse => Shape::Ellipse,
                    ShapeArg::Rect => Shape::Rect,
                },
                flip_rate,
                morph_noise: morph,
                height,
                width,
                seed,
            };
            gen_segmentation(&spec)?.write_to(&out)?;
            out
        }
    };
    print_checksums(&out)?;
    Ok(ExitCode::SUCCESS)
}

pub fn metrics(args: MetricsArgs) -> Result<ExitCode> {
    let table = read_categorical(&args.input, &args.columns.schema())?;
    let skills: Option<BTreeMap<String, f64>> = match &args.skills {
        None => None,
        Some(path) => Some(
            read_ground_truth_labels(path, "worker", "skill")?
                .into_iter()
                .map(|(w, s)| {
                    s.parse::<f64>()
                        .map(|v| (w, v))
                        .map_err(|_| Error::Parse(format!("skill `{s}` is not a number")))
                })
                .collect::<Result<_>>()?,
        ),
    };
    let alpha = quality::krippendorff_alpha(&table, &Distance::Nominal)?;
    if alpha.degenerate {
        eprintln!("warning: every response carries the same label; alpha pinned to 1");
    }
    let unc = quality::uncertainty(&table, skills.as_ref());
    let ds = crowdinfer::categorical::dawid_skene(&table, &Default::default());
    let rows = vec![
        ("krippendorff_alpha".to_owned(), alpha.value),
        ("agreement_with_aggregate".to_owned(), quality::agreement_with_aggregate(&table)),
        ("mean_uncertainty".to_owned(), unc.mean),
        ("ds_posterior_quality".to_owned(), quality::ds_posterior_quality(&ds)?),
    ];
    metric_csv(&rows, args.output.as_deref())?;
    if let Some(path) = &args.uncertainty_out {
        write_rows(
            path,
            &["task", "entropy"],
            unc.per_task.iter().map(|(t, h)| [t.clone(), h.to_string()]),
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn bench(args: BenchArgs) -> Result<ExitCode> {
    let mut config = BenchConfig::from_path(&args.config)?;
    if let Some(p) = args.parallelism {
        config.parallelism = p;
    }
    let out_dir = args.output.or_else(|| config.output_dir()).unwrap_or_else(|| {
        let stem = args.config.file_stem().unwrap_or_default().to_string_lossy();
        PathBuf::from(format!("{stem}-report"))
    });
    let report = run_bench(&config)?;
    report.write(&out_dir)?;
    print!("{}", report.to_markdown());
    Ok(if report.all_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

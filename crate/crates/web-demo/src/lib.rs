//! Browser bindings for a few crowdinfer operations. Every export takes plain
//! strings or numbers and returns a JSON string; the `*_json` functions do the
//! work and are usable from native code.

use crowdinfer::data::{read_categorical_str, ColumnSchema, Mask, RecordFormat};
use crowdinfer::methods::{self, Input, Method, MethodOptions, Output};
use crowdinfer::metrics::iou;
use crowdinfer::quality::{agreement_with_aggregate, krippendorff_alpha, Distance};
use crowdinfer::segmentation::{seg_em, seg_majority_vote};
use crowdinfer::sequence::Wtn;
use crowdinfer::synth::{gen_segmentation, SegmentationSpec, Shape};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_js(result: Result<String, String>) -> Result<String, JsValue> {
    result.map_err(|e| JsValue::from_str(&e))
}

#[derive(Serialize)]
struct TaskLabel {
    task: String,
    label: String,
    /// Posterior of the chosen label, when the method has posteriors.
    confidence: Option<f64>,
}

#[derive(Serialize)]
struct CategoricalReport {
    method: String,
    labels: Vec<TaskLabel>,
    skills: Vec<(String, f64)>,
    iterations: usize,
    alpha: Option<f64>,
    agreement: f64,
}

/// Aggregates `task,worker,label` CSV text with a categorical method.
pub fn categorical_json(csv: &str, method: &str) -> Result<String, String> {
    let method: Method = method.parse().map_err(|e: crowdinfer::Error| e.to_string())?;
    let table = read_categorical_str(csv, RecordFormat::Csv, &ColumnSchema::default()).map_err(|e| e.to_string())?;
    let output = methods::run(method, Input::Categorical(&table), &MethodOptions::default()).map_err(|e| e.to_string())?;
    let Output::Labels(result) = output else {
        return Err(format!("{method} is not a categorical method"));
    };
    let labels = result
        .labels
        .iter()
        .map(|(task, label)| {
            let confidence = result.posteriors.as_ref().map(|p| {
                let i = result.label_set.iter().position(|l| l == label).unwrap_or(0);
                p[task][i]
            });
            TaskLabel {
                task: task.clone(),
                label: label.clone(),
                confidence,
            }
        })
        .collect();
    let report = CategoricalReport {
        method: method.display_name().to_owned(),
        labels,
        skills: result.skills.clone().unwrap_or_default().into_iter().collect(),
        iterations: result.trace.iterations_run,
        alpha: krippendorff_alpha(&table, &Distance::Nominal).ok().map(|a| a.value),
        agreement: agreement_with_aggregate(&table),
    };
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SegmentationReport {
    height: usize,
    width: usize,
    truth: Vec<u8>,
    workers: Vec<Vec<u8>>,
    worker_iou: Vec<f64>,
    mv: Vec<u8>,
    mv_iou: f64,
    em: Vec<u8>,
    em_iou: f64,
}

fn bits(mask: &Mask) -> Vec<u8> {
    mask.cells().iter().map(|&c| u8::from(c)).collect()
}

/// Generates one noisy segmentation task and fuses it with majority vote and EM.
pub fn segmentation_json(seed: u64, n_workers: usize, flip_rate: f64) -> Result<String, String> {
    let data = gen_segmentation(&SegmentationSpec {
        n_tasks: 1,
        n_workers,
        shape: Shape::Ellipse,
        flip_rate,
        morph_noise: 2,
        height: 48,
        width: 48,
        seed,
    })
    .map_err(|e| e.to_string())?;
    let set = &data.masks[0];
    let truth = &data.truth[set.task()];
    let mv = seg_majority_vote(set).map_err(|e| e.to_string())?;
    let em = seg_em(set, 10, 0.01).map_err(|e| e.to_string())?.mask;
    let score = |m: &Mask| iou(m, truth).map_err(|e| e.to_string());
    let report = SegmentationReport {
        height: truth.height(),
        width: truth.width(),
        truth: bits(truth),
        workers: set.masks().iter().map(|(_, m)| bits(m)).collect(),
        worker_iou: set.masks().iter().map(|(_, m)| score(m)).collect::<Result<_, _>>()?,
        mv_iou: score(&mv)?,
        mv: bits(&mv),
        em_iou: score(&em)?,
        em: bits(&em),
    };
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct RoverReport {
    output: Vec<String>,
    slots: Vec<Vec<Option<String>>>,
}

/// Runs ROVER over one hypothesis per non-empty line.
pub fn rover_json(text: &str) -> Result<String, String> {
    let hyps: Vec<Vec<String>> = text
        .lines()
        .map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>())
        .filter(|h| !h.is_empty())
        .collect();
    let (base, rest) = hyps.split_first().ok_or("enter at least one hypothesis")?;
    let mut wtn = Wtn::new(base);
    for h in rest {
        wtn.align(h);
    }
    let report = RoverReport {
        output: wtn.vote(),
        slots: wtn.slots().to_vec(),
    };
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn categorical_demo(csv: &str, method: &str) -> Result<String, JsValue> {
    to_js(categorical_json(csv, method))
}

#[wasm_bindgen]
pub fn segmentation_demo(seed: u32, n_workers: u32, flip_rate: f64) -> Result<String, JsValue> {
    to_js(segmentation_json(u64::from(seed), n_workers as usize, flip_rate))
}

#[wasm_bindgen]
pub fn rover_demo(text: &str) -> Result<String, JsValue> {
    to_js(rover_json(text))
}

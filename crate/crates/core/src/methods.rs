//! Name-based dispatch over every aggregation method, used by the CLI and the bench runner.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::categorical::{self, CategoricalParams};
use crate::data::{CategoricalResult, Dataset, Mask, MaskSet, Modality, Trace};
use crate::error::{Error, Result};
use crate::metrics;
use crate::pairwise::{self, PairwiseParams, ScoreResult};
use crate::segmentation;
use crate::sequence::{self, SequenceResult, TrigramTfIdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    Mv,
    Wawa,
    Ds,
    Glad,
    Mace,
    Kos,
    Mmsr,
    Bt,
    NoisyBt,
    Rover,
    Rasa,
    Hrrasa,
    SegMv,
    SegEm,
    SegRasa,
}

impl Method {
    pub const ALL: [Method; 15] = [
        Method::Mv,
        Method::Wawa,
        Method::Ds,
        Method::Glad,
        Method::Mace,
        Method::Kos,
        Method::Mmsr,
        Method::Bt,
        Method::NoisyBt,
        Method::Rover,
        Method::Rasa,
        Method::Hrrasa,
        Method::SegMv,
        Method::SegEm,
        Method::SegRasa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mv => "mv",
            Method::Wawa => "wawa",
            Method::Ds => "ds",
            Method::Glad => "glad",
            Method::Mace => "mace",
            Method::Kos => "kos",
            Method::Mmsr => "mmsr",
            Method::Bt => "bt",
            Method::NoisyBt => "noisybt",
            Method::Rover => "rover",
            Method::Rasa => "rasa",
            Method::Hrrasa => "hrrasa",
            Method::SegMv => "seg-mv",
            Method::SegEm => "seg-em",
            Method::SegRasa => "seg-rasa",
        }
    }

    /// Column heading in Markdown reports.
    pub fn display_name(self) -> &'static str {
        match self {
            Method::Mv => "MV",
            Method::Wawa => "Wawa",
            Method::Ds => "DS",
            Method::Glad => "GLAD",
            Method::Mace => "MACE",
            Method::Kos => "KOS",
            Method::Mmsr => "M-MSR",
            Method::Bt => "BT",
            Method::NoisyBt => "noisyBT",
            Method::Rover => "ROVER",
            Method::Rasa => "RASA",
            Method::Hrrasa => "HRRASA",
            Method::SegMv => "MV",
            Method::SegEm => "EM",
            Method::SegRasa => "RASA",
        }
    }

    pub fn modality(self) -> Modality {
        match self {
            Method::Mv
            | Method::Wawa
            | Method::Ds
            | Method::Glad
            | Method::Mace
            | Method::Kos
            | Method::Mmsr => Modality::Categorical,
            Method::Bt | Method::NoisyBt => Modality::Pairwise,
            Method::Rover | Method::Rasa | Method::Hrrasa => Modality::Sequence,
            Method::SegMv | Method::SegEm | Method::SegRasa => Modality::Segmentation,
        }
    }

    /// Keys accepted in [`MethodOptions::params`].
    pub fn param_keys(self) -> &'static [&'static str] {
        match self {
            Method::Mv | Method::Wawa | Method::Rover | Method::SegMv => &[],
            Method::Ds => &["tol", "smoothing"],
            Method::Glad => &["tol", "grad_steps", "lr"],
            Method::Mace => &["tol", "smoothing", "restarts"],
            Method::Kos => &[],
            Method::Mmsr => &["tol"],
            Method::Bt => &["tol"],
            Method::NoisyBt => &["tol", "lr", "l2"],
            Method::Rasa | Method::SegRasa => &[],
            Method::Hrrasa => &["lambda"],
            Method::SegEm => &["smoothing"],
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_owned()))
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.name().to_owned()
    }
}

/// Iteration count, seed and method-specific numeric parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodOptions {
    #[serde(default)]
    pub n_iter: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl MethodOptions {
    pub fn validate(&self, method: Method) -> Result<()> {
        for key in self.params.keys() {
            if !method.param_keys().contains(&key.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "method `{method}` has no parameter `{key}`"
                )));
            }
        }
        for (key, &value) in &self.params {
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!("`{key}` must be finite")));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(&v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            Some(v) => Err(Error::InvalidParameter(format!(
                "`{key}` must be a non-negative integer, got {v}"
            ))),
        }
    }

    fn categorical(&self) -> CategoricalParams {
        let d = CategoricalParams::default();
        CategoricalParams {
            n_iter: self.n_iter.unwrap_or(d.n_iter),
            tol: self.get("tol", d.tol),
            seed: self.seed,
            smoothing: self.get("smoothing", d.smoothing),
        }
    }

    fn pairwise(&self) -> PairwiseParams {
        let d = PairwiseParams::default();
        PairwiseParams {
            n_iter: self.n_iter.unwrap_or(d.n_iter),
            tol: self.get("tol", d.tol),
            seed: self.seed,
            lr: self.get("lr", d.lr),
            l2: self.get("l2", d.l2),
        }
    }
}

/// Borrowed method input.
#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    Categorical(&'a crate::data::AnnotationTable),
    Pairwise(&'a crate::data::PairwiseTable),
    Sequence(&'a crate::data::SequenceTable),
    Segmentation(&'a [MaskSet]),
}

impl Input<'_> {
    pub fn modality(&self) -> Modality {
        match self {
            Input::Categorical(_) => Modality::Categorical,
            Input::Pairwise(_) => Modality::Pairwise,
            Input::Sequence(_) => Modality::Sequence,
            Input::Segmentation(_) => Modality::Segmentation,
        }
    }
}

impl Dataset {
    pub fn input(&self) -> Input<'_> {
        match self {
            Dataset::Categorical { table, .. } => Input::Categorical(table),
            Dataset::Pairwise { table, .. } => Input::Pairwise(table),
            Dataset::Sequence { table, .. } => Input::Sequence(table),
            Dataset::Segmentation { masks, .. } => Input::Segmentation(masks),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Labels(CategoricalResult),
    Scores(ScoreResult),
    Texts(SequenceResult),
    Masks {
        masks: BTreeMap<String, Mask>,
        traces: BTreeMap<String, Trace>,
    },
}

impl Output {
    /// Iterations and final change, summed/maximized over tasks for per-task methods.
    pub fn trace_summary(&self) -> (usize, f64) {
        let trace = match self {
            Output::Labels(r) => &r.trace,
            Output::Scores(r) => &r.trace,
            Output::Texts(r) => &r.trace,
            Output::Masks { traces, .. } => {
                let iterations = traces.values().map(|t| t.iterations_run).max().unwrap_or(0);
                let delta = traces.values().map(|t| t.final_delta).fold(0.0, f64::max);
                return (iterations, delta);
            }
        };
        (trace.iterations_run, trace.final_delta)
    }
}

fn check_modality(method: Method, modality: Modality) -> Result<()> {
    if method.modality() == modality {
        Ok(())
    } else {
        Err(Error::ModalityMismatch {
            method: method.name().to_owned(),
            modality: modality.to_string(),
        })
    }
}

/// Runs `method` on `input`.
pub fn run(method: Method, input: Input<'_>, opts: &MethodOptions) -> Result<Output> {
    check_modality(method, input.modality())?;
    opts.validate(method)?;
    let cat = opts.categorical();
    let n_iter = opts.n_iter.unwrap_or(10);
    Ok(match (method, input) {
        (Method::Mv, Input::Categorical(t)) => Output::Labels(categorical::majority_vote(t)),
        (Method::Wawa, Input::Categorical(t)) => Output::Labels(categorical::wawa(t)),
        (Method::Ds, Input::Categorical(t)) => Output::Labels(categorical::dawid_skene(t, &cat)),
        (Method::Glad, Input::Categorical(t)) => Output::Labels(categorical::glad(
            t,
            &cat,
            opts.count("grad_steps", 25)?,
            opts.get("lr", 0.1),
        )),
        (Method::Mace, Input::Categorical(t)) => {
            Output::Labels(categorical::mace(t, &cat, opts.count("restarts", 10)?))
        }
        (Method::Kos, Input::Categorical(t)) => Output::Labels(categorical::kos(t, &cat, n_iter)?),
        (Method::Mmsr, Input::Categorical(t)) => Output::Labels(categorical::mmsr(t, &cat)?),
        (Method::Bt, Input::Pairwise(t)) => Output::Scores(pairwise::bradley_terry(t, &opts.pairwise())?),
        (Method::NoisyBt, Input::Pairwise(t)) => Output::Scores(pairwise::noisy_bt(t, &opts.pairwise())?),
        (Method::Rover, Input::Sequence(t)) => Output::Texts(sequence::rover_table(t)?),
        (Method::Rasa, Input::Sequence(t)) => {
            Output::Texts(sequence::rasa(t, &TrigramTfIdf::default(), n_iter))
        }
        (Method::Hrrasa, Input::Sequence(t)) => Output::Texts(sequence::hrrasa(
            t,
            &TrigramTfIdf::default(),
            n_iter,
            opts.get("lambda", 0.5),
        )),
        (Method::SegMv | Method::SegEm | Method::SegRasa, Input::Segmentation(sets)) => {
            let mut masks = BTreeMap::new();
            let mut traces = BTreeMap::new();
            for set in sets {
                let (mask, trace) = match method {
                    Method::SegMv => (segmentation::seg_majority_vote(set)?, Trace::default()),
                    Method::SegEm => {
                        let r = segmentation::seg_em(set, n_iter, opts.get("smoothing", 0.01))?;
                        (r.mask, r.trace)
                    }
                    _ => {
                        let r = segmentation::seg_rasa(set, n_iter)?;
                        (r.mask, r.trace)
                    }
                };
                masks.insert(set.task().to_owned(), mask);
                traces.insert(set.task().to_owned(), trace);
            }
            Output::Masks { masks, traces }
        }
        _ => unreachable!("modality checked above"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Accuracy,
    Spearman,
    Wer,
    Iou,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Spearman => "spearman",
            Metric::Wer => "wer",
            Metric::Iou => "iou",
        }
    }

    pub fn modality(self) -> Modality {
        match self {
            Metric::Accuracy => Modality::Categorical,
            Metric::Spearman => Modality::Pairwise,
            Metric::Wer => Modality::Sequence,
            Metric::Iou => Modality::Segmentation,
        }
    }

    /// The metric conventionally reported for a modality.
    pub fn for_modality(modality: Modality) -> Metric {
        match modality {
            Modality::Categorical => Metric::Accuracy,
            Modality::Pairwise => Metric::Spearman,
            Modality::Sequence => Metric::Wer,
            Modality::Segmentation => Metric::Iou,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Metric::Accuracy, Metric::Spearman, Metric::Wer, Metric::Iou]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric `{s}`")))
    }
}

/// Scores `output` against the ground truth carried by `dataset`.
pub fn evaluate(metric: Metric, output: &Output, dataset: &Dataset) -> Result<f64> {
    match (metric, output, dataset) {
        (Metric::Accuracy, Output::Labels(r), Dataset::Categorical { truth, .. }) => {
            metrics::accuracy(&r.labels, truth)
        }
        (Metric::Spearman, Output::Scores(r), Dataset::Pairwise { truth, .. }) => {
            metrics::spearman_rho(&r.scores, truth)
        }
        (Metric::Wer, Output::Texts(r), Dataset::Sequence { truth, .. }) => {
            metrics::corpus_wer(&r.labels, truth)
        }
        (Metric::Iou, Output::Masks { masks, .. }, Dataset::Segmentation { truth, .. }) => {
            metrics::mean_iou(masks, truth)
        }
        _ => Err(Error::InvalidParameter(format!(
            "metric `{metric}` does not apply to {} data",
            dataset.modality()
        ))),
    }
}

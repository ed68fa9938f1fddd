//! Seeded generators whose outputs carry exact ground truth.
//!
//! Every generator draws from a ChaCha stream seeded by the spec, so the same
//! spec always yields byte-identical files.

mod words;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{
    write_annotations, write_comparisons, write_labels, write_mask_index, write_mask_map,
    write_skills, write_texts, write_transcriptions, AnnotationTable, LabelTruth, Mask, MaskSet,
    MaskTruth, PairwiseTable, ScoreTruth, SequenceTable, TextTruth,
};
use crate::error::{Error, Result};
use crate::util::{rng, sigmoid, Rng as ChaRng};

pub use words::WORDS;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn padded(prefix: &str, i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len();
    format!("{prefix}{i:0width$}")
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "dist")]
pub enum SkillDist {
    Beta { a: f64, b: f64 },
    Fixed { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorkerModel {
    /// Correct with probability `s`, otherwise uniform over the wrong labels.
    OneCoin,
    /// Random row-stochastic confusion matrix with diagonal `s`.
    Confusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoricalSpec {
    pub n_tasks: usize,
    pub n_workers: usize,
    pub per_task: usize,
    pub n_labels: usize,
    pub skills: SkillDist,
    #[serde(default = "one_coin")]
    pub model: WorkerModel,
    pub seed: u64,
}

fn one_coin() -> WorkerModel {
    WorkerModel::OneCoin
}

impl CategoricalSpec {
    /// Binary one-coin crowd with Beta(4, 1) skills and 5 responses per task.
    pub fn binary_beta(n_tasks: usize, n_workers: usize, seed: u64) -> Self {
        Self {
            n_tasks,
            n_workers,
            per_task: 5,
            n_labels: 2,
            skills: SkillDist::Beta { a: 4.0, b: 1.0 },
            model: WorkerModel::OneCoin,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCategorical {
    pub table: AnnotationTable,
    pub truth: LabelTruth,
    pub skills: BTreeMap<String, f64>,
}

impl SyntheticCategorical {
    /// Writes `crowd_labels.csv`, `gt.csv` and `skills.csv` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        ensure_dir(dir)?;
        write_annotations(&dir.join("crowd_labels.csv"), &self.table)?;
        write_labels(&dir.join("gt.csv"), &self.truth)?;
        write_skills(&dir.join("skills.csv"), &self.skills)
    }
}

/// Draws a categorical crowd: uniform true labels, `per_task` distinct workers per task.
pub fn gen_categorical(spec: &CategoricalSpec) -> Result<SyntheticCategorical> {
    if spec.n_tasks == 0 || spec.n_workers == 0 || spec.per_task == 0 {
        return Err(invalid("n_tasks, n_workers and per_task must be positive"));
    }
    if spec.per_task > spec.n_workers {
        return Err(invalid(format!(
            "per_task ({}) exceeds n_workers ({})",
            spec.per_task, spec.n_workers
        )));
    }
    if spec.n_labels < 2 {
        return Err(invalid("n_labels must be at least 2"));
    }
    let skill_sampler: Box<dyn Fn(&mut ChaRng) -> f64> = match spec.skills {
        SkillDist::Beta { a, b } => {
            let beta = Beta::new(a, b).map_err(|e| invalid(format!("beta({a}, {b}): {e}")))?;
            Box::new(move |r: &mut ChaRng| beta.sample(r))
        }
        SkillDist::Fixed { value } if (0.0..=1.0).contains(&value) => Box::new(move |_| value),
        SkillDist::Fixed { value } => return Err(invalid(format!("skill {value} outside [0, 1]"))),
    };

    let k = spec.n_labels;
    let mut rng = rng(spec.seed);
    let truth: Vec<usize> = (0..spec.n_tasks).map(|_| rng.random_range(0..k)).collect();
    let skills: Vec<f64> = (0..spec.n_workers).map(|_| skill_sampler(&mut rng)).collect();
    let confusion: Vec<Vec<Vec<f64>>> = match spec.model {
        WorkerModel::OneCoin => vec![],
        WorkerModel::Confusion => skills
            .iter()
            .map(|&s| {
                (0..k)
                    .map(|c| {
                        let raw: Vec<f64> = (0..k - 1).map(|_| Exp1.sample(&mut rng)).collect();
                        let total: f64 = raw.iter().sum();
                        let mut off = raw.into_iter().map(|v| (1.0 - s) * v / total);
                        (0..k)
                            .map(|j| if j == c { s } else { off.next().unwrap() })
                            .collect()
                    })
                    .collect()
            })
            .collect(),
    };

    let tasks: Vec<String> = (0..spec.n_tasks).map(|i| padded("t", i, spec.n_tasks)).collect();
    let workers: Vec<String> = (0..spec.n_workers).map(|i| padded("w", i, spec.n_workers)).collect();
    let labels: Vec<String> = (0..k).map(|i| padded("", i, k)).collect();

    let mut records = Vec::with_capacity(spec.n_tasks * spec.per_task);
    for (t, &c) in truth.iter().enumerate() {
        let mut chosen = sample(&mut rng, spec.n_workers, spec.per_task).into_vec();
        chosen.sort_unstable();
        for w in chosen {
            let answer = match spec.model {
                WorkerModel::OneCoin => {
                    if rng.random::<f64>() < skills[w] {
                        c
                    } else {
                        let other = rng.random_range(0..k - 1);
                        if other >= c {
                            other + 1
                        } else {
                            other
                        }
                    }
                }
                WorkerModel::Confusion => {
                    let u: f64 = rng.random();
                    let row = &confusion[w][c];
                    let mut acc = 0.0;
                    row.iter()
                        .position(|p| {
                            acc += p;
                            u < acc
                        })
                        .unwrap_or(k - 1)
                }
            };
            records.push((&tasks[t], &workers[w], &labels[answer]));
        }
    }
    let table = AnnotationTable::from_records(records)?;
    Ok(SyntheticCategorical {
        table,
        truth: tasks
            .iter()
            .zip(&truth)
            .map(|(t, &c)| (t.clone(), labels[c].clone()))
            .collect(),
        skills: workers.iter().cloned().zip(skills).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "dist")]
pub enum ScoreDist {
    Normal { mean: f64, std: f64 },
    /// Item `i` gets score `i · step`.
    Linear { step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairwiseSpec {
    pub n_items: usize,
    pub n_workers: usize,
    pub n_comparisons: usize,
    #[serde(default = "standard_normal")]
    pub scores: ScoreDist,
    /// Probability that a worker ignores the items and flips a coin.
    pub worker_noise: f64,
    pub seed: u64,
}

fn standard_normal() -> ScoreDist {
    ScoreDist::Normal {
        mean: 0.0,
        std: 1.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPairwise {
    pub table: PairwiseTable,
    pub truth: ScoreTruth,
}

impl SyntheticPairwise {
    /// Writes `comparisons.csv` and `gt.csv` (item, score) under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        ensure_dir(dir)?;
        write_comparisons(&dir.join("comparisons.csv"), &self.table)?;
        let path = dir.join("gt.csv");
        let mut writer = csv::Writer::from_path(&path)?;
        writer.write_record(["item", "score"])?;
        for (item, score) in &self.truth {
            writer.write_record([item.clone(), score.to_string()])?;
        }
        writer.flush().map_err(|e| Error::Io { path, source: e })
    }
}

/// Bradley–Terry comparisons mixed with per-comparison coin flips at rate `worker_noise`.
pub fn gen_pairwise(spec: &PairwiseSpec) -> Result<SyntheticPairwise> {
    if spec.n_items < 2 || spec.n_workers == 0 || spec.n_comparisons == 0 {
        return Err(invalid("need ≥ 2 items, ≥ 1 worker and ≥ 1 comparison"));
    }
    if !(0.0..=1.0).contains(&spec.worker_noise) {
        return Err(invalid(format!("worker_noise {} outside [0, 1]", spec.worker_noise)));
    }
    let mut rng = rng(spec.seed);
    let scores: Vec<f64> = match spec.scores {
        ScoreDist::Normal { mean, std } => {
            let normal = Normal::new(mean, std).map_err(|e| invalid(e.to_string()))?;
            (0..spec.n_items).map(|_| normal.sample(&mut rng)).collect()
        }
        ScoreDist::Linear { step } => (0..spec.n_items).map(|i| i as f64 * step).collect(),
    };
    let items: Vec<String> = (0..spec.n_items).map(|i| padded("i", i, spec.n_items)).collect();
    let workers: Vec<String> = (0..spec.n_workers).map(|i| padded("w", i, spec.n_workers)).collect();
    let mut records = Vec::with_capacity(spec.n_comparisons);
    for _ in 0..spec.n_comparisons {
        let worker = rng.random_range(0..spec.n_workers);
        let pair = sample(&mut rng, spec.n_items, 2);
        let (left, right) = (pair.index(0), pair.index(1));
        let left_wins = if rng.random::<f64>() < spec.worker_noise {
            rng.random::<bool>()
        } else {
            rng.random::<f64>() < sigmoid(scores[left] - scores[right])
        };
        let winner = if left_wins { left } else { right };
        records.push((
            workers[worker].clone(),
            items[left].clone(),
            items[right].clone(),
            items[winner].clone(),
        ));
    }
    Ok(SyntheticPairwise {
        table: PairwiseTable::from_records(records)?,
        truth: items.into_iter().zip(scores).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub n_tasks: usize,
    pub n_workers: usize,
    pub token_error_rate: f64,
    pub seed: u64,
    #[serde(default = "default_min_len")]
    pub min_len: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
}

fn default_min_len() -> usize {
    8
}

fn default_max_len() -> usize {
    16
}

impl SequenceSpec {
    pub fn new(n_tasks: usize, n_workers: usize, token_error_rate: f64, seed: u64) -> Self {
        Self {
            n_tasks,
            n_workers,
            token_error_rate,
            seed,
            min_len: default_min_len(),
            max_len: default_max_len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSequence {
    pub table: SequenceTable,
    pub truth: TextTruth,
}

impl SyntheticSequence {
    /// Writes `transcriptions.csv` and `gt.csv` (task, text) under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        ensure_dir(dir)?;
        write_transcriptions(&dir.join("transcriptions.csv"), &self.table)?;
        write_texts(&dir.join("gt.csv"), &self.truth)
    }
}

fn random_word(rng: &mut ChaRng) -> &'static str {
    WORDS[rng.random_range(0..WORDS.len())]
}

/// Applies one independent error per reference token with probability `rate`;
/// the error is a substitution, deletion or insertion with equal odds.
pub fn corrupt(reference: &[String], rate: f64, rng: &mut ChaRng) -> Vec<String> {
    let mut out = Vec::with_capacity(reference.len() + 2);
    for token in reference {
        if rng.random::<f64>() < rate {
            match rng.random_range(0..3) {
                0 => loop {
                    let w = random_word(rng);
                    if w != token {
                        out.push(w.to_owned());
                        break;
                    }
                },
                1 => {}
                _ => {
                    out.push(token.clone());
                    out.push(random_word(rng).to_owned());
                }
            }
        } else {
            out.push(token.clone());
        }
    }
    if out.is_empty() {
        out.push(reference[0].clone());
    }
    out
}

/// Reference sentences from the bundled word list, one corrupted copy per worker.
pub fn gen_sequence(spec: &SequenceSpec) -> Result<SyntheticSequence> {
    if spec.n_tasks == 0 || spec.n_workers == 0 {
        return Err(invalid("n_tasks and n_workers must be positive"));
    }
    if !(0.0..=1.0).contains(&spec.token_error_rate) {
        return Err(invalid(format!(
            "token_error_rate {} outside [0, 1]",
            spec.token_error_rate
        )));
    }
    if spec.min_len == 0 || spec.min_len > spec.max_len {
        return Err(invalid("need 1 ≤ min_len ≤ max_len"));
    }
    let mut rng = rng(spec.seed);
    let workers: Vec<String> = (0..spec.n_workers).map(|i| padded("w", i, spec.n_workers)).collect();
    let mut truth = BTreeMap::new();
    let mut records = Vec::with_capacity(spec.n_tasks * spec.n_workers);
    for t in 0..spec.n_tasks {
        let task = padded("t", t, spec.n_tasks);
        let len = rng.random_range(spec.min_len..=spec.max_len);
        let reference: Vec<String> = (0..len).map(|_| random_word(&mut rng).to_owned()).collect();
        for worker in &workers {
            let text = corrupt(&reference, spec.token_error_rate, &mut rng).join(" ");
            records.push((task.clone(), worker.clone(), text));
        }
        truth.insert(task, reference);
    }
    Ok(SyntheticSequence {
        table: SequenceTable::from_records(records)?,
        truth,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Ellipse,
    Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentationSpec {
    pub n_tasks: usize,
    pub n_workers: usize,
    pub shape: Shape,
    pub flip_rate: f64,
    /// Largest dilation/erosion radius applied to a worker's copy of the truth.
    pub morph_noise: usize,
    pub height: usize,
    pub width: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSegmentation {
    pub masks: Vec<MaskSet>,
    pub truth: MaskTruth,
}

impl SyntheticSegmentation {
    /// Writes `masks/index.csv` and `truth/index.csv` with their PBM files under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        write_mask_index(&dir.join("masks"), "index.csv", &self.masks)?;
        write_mask_map(&dir.join("truth"), "index.csv", &self.truth)?;
        Ok(())
    }
}

/// Grows (`dilate = true`) or shrinks a mask by a Euclidean disk of `radius`.
pub fn morph(mask: &Mask, radius: usize, dilate: bool) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    let r = radius as isize;
    let offsets: Vec<(isize, isize)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dy, dx)))
        .filter(|(dy, dx)| dy * dy + dx * dx <= r * r)
        .collect();
    let (h, w) = (mask.height() as isize, mask.width() as isize);
    Mask::from_fn(mask.height(), mask.width(), |row, col| {
        let hit = |&(dy, dx): &(isize, isize)| {
            let (y, x) = (row as isize + dy, col as isize + dx);
            // outside the grid counts as background
            y >= 0 && y < h && x >= 0 && x < w && mask.get(y as usize, x as usize)
        };
        if dilate {
            offsets.iter().any(hit)
        } else {
            offsets.iter().all(hit)
        }
    })
}

fn draw_shape(spec: &SegmentationSpec, rng: &mut ChaRng) -> Mask {
    let (h, w) = (spec.height as f64, spec.width as f64);
    let cy = rng.random_range(0.35..0.65) * h;
    let cx = rng.random_range(0.35..0.65) * w;
    let ry = rng.random_range(0.12..0.3) * h;
    let rx = rng.random_range(0.12..0.3) * w;
    Mask::from_fn(spec.height, spec.width, |row, col| {
        let dy = (row as f64 + 0.5 - cy) / ry;
        let dx = (col as f64 + 0.5 - cx) / rx;
        match spec.shape {
            Shape::Ellipse => dy * dy + dx * dx <= 1.0,
            Shape::Rect => dy.abs() <= 1.0 && dx.abs() <= 1.0,
        }
    })
}

/// One random shape per task; each worker copy is morphed by a random radius in
/// `0..=morph_noise` (dilation or erosion) and then has pixels flipped i.i.d.
pub fn gen_segmentation(spec: &SegmentationSpec) -> Result<SyntheticSegmentation> {
    if spec.n_tasks == 0 || spec.n_workers == 0 || spec.height == 0 || spec.width == 0 {
        return Err(invalid("n_tasks, n_workers, height and width must be positive"));
    }
    if !(0.0..=1.0).contains(&spec.flip_rate) {
        return Err(invalid(format!("flip_rate {} outside [0, 1]", spec.flip_rate)));
    }
    let mut rng = rng(spec.seed);
    let workers: Vec<String> = (0..spec.n_workers).map(|i| padded("w", i, spec.n_workers)).collect();
    let mut masks = Vec::with_capacity(spec.n_tasks);
    let mut truth = BTreeMap::new();
    for t in 0..spec.n_tasks {
        let task = padded("t", t, spec.n_tasks);
        let reference = draw_shape(spec, &mut rng);
        let mut set = Vec::with_capacity(spec.n_workers);
        for worker in &workers {
            let radius = rng.random_range(0..=spec.morph_noise);
            let dilate = rng.random::<bool>();
            let mut mask = morph(&reference, radius, dilate);
            for row in 0..spec.height {
                for col in 0..spec.width {
                    if rng.random::<f64>() < spec.flip_rate {
                        mask.set(row, col, !mask.get(row, col));
                    }
                }
            }
            set.push((worker.clone(), mask));
        }
        masks.push(MaskSet::new(task.clone(), set)?);
        truth.insert(task, reference);
    }
    Ok(SyntheticSegmentation { masks, truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_workers_copy_the_truth() {
        let spec = CategoricalSpec {
            skills: SkillDist::Fixed { value: 1.0 },
            n_labels: 3,
            ..CategoricalSpec::binary_beta(200, 20, 3)
        };
        let data = gen_categorical(&spec).unwrap();
        for (task, _, label) in data.table.records() {
            assert_eq!(data.truth[task], label);
        }
    }

    #[test]
    fn per_task_above_workers_is_rejected() {
        let spec = CategoricalSpec {
            per_task: 6,
            ..CategoricalSpec::binary_beta(10, 5, 0)
        };
        assert!(matches!(gen_categorical(&spec), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn confusion_model_keeps_diagonal() {
        let spec = CategoricalSpec {
            skills: SkillDist::Fixed { value: 0.7 },
            model: WorkerModel::Confusion,
            n_labels: 4,
            per_task: 10,
            ..CategoricalSpec::binary_beta(3000, 10, 11)
        };
        let data = gen_categorical(&spec).unwrap();
        let correct = data
            .table
            .records()
            .filter(|(t, _, l)| data.truth[*t] == *l)
            .count() as f64;
        let rate = correct / data.table.responses().len() as f64;
        assert!((rate - 0.7).abs() < 0.02, "{rate}");
    }

    #[test]
    fn linear_scores_without_noise_never_upset() {
        let data = gen_pairwise(&PairwiseSpec {
            n_items: 10,
            n_workers: 3,
            n_comparisons: 2000,
            scores: ScoreDist::Linear { step: 50.0 },
            worker_noise: 0.0,
            seed: 4,
        })
        .unwrap();
        for (_, left, right, winner) in data.table.records() {
            let better = if data.truth[left] > data.truth[right] { left } else { right };
            assert_eq!(winner, better);
        }
    }

    #[test]
    fn zero_error_rate_copies_reference() {
        let data = gen_sequence(&SequenceSpec::new(20, 3, 0.0, 1)).unwrap();
        for row in data.table.rows() {
            assert_eq!(row.tokens, data.truth[&row.task]);
        }
    }

    #[test]
    fn morphology_grows_and_shrinks() {
        let mask = Mask::from_fn(9, 9, |r, c| (3..6).contains(&r) && (3..6).contains(&c));
        assert_eq!(morph(&mask, 1, false).count_ones(), 1);
        assert_eq!(morph(&mask, 1, true).count_ones(), 9 + 12);
        assert_eq!(morph(&mask, 0, true), mask);
    }

    #[test]
    fn noiseless_segmentation_matches_truth() {
        let data = gen_segmentation(&SegmentationSpec {
            n_tasks: 3,
            n_workers: 4,
            shape: Shape::Rect,
            flip_rate: 0.0,
            morph_noise: 0,
            height: 16,
            width: 20,
            seed: 8,
        })
        .unwrap();
        for set in &data.masks {
            for (_, mask) in set.masks() {
                assert_eq!(mask, &data.truth[set.task()]);
            }
        }
    }
}

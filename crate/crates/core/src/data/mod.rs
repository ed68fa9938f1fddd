//! Annotation tables, masks, and aggregation results.
//!
//! Every table keeps its ids as opaque strings and maps them to dense indices
//! through sorted dictionaries, so two tables built from the same rows in any
//! order are identical.

mod catalog;
mod ingest;
mod pbm;

use std::collections::{BTreeMap, BTreeSet};

pub use catalog::{load_catalog_dataset, Catalog, CatalogEntry, Columns, Dataset, Modality};
pub use ingest::{
    read_categorical, read_categorical_str, read_ground_truth_labels, read_ground_truth_scores,
    read_ground_truth_texts, read_pairwise, read_pairwise_str, read_sequence, read_sequence_str,
    write_annotations, write_comparisons, write_labels, write_posteriors, write_scores,
    write_rows, write_skills, write_texts, write_transcriptions, ColumnSchema, RecordFormat,
};
pub use pbm::{
    parse_pbm, read_mask_index, read_mask_map, read_masks, read_pbm, render_pbm, write_mask_index,
    write_mask_map, write_pbm,
};

use crate::error::{Error, Result};

/// Ground truth for categorical tasks.
pub type LabelTruth = BTreeMap<String, String>;
/// Ground-truth item scores for pairwise data.
pub type ScoreTruth = BTreeMap<String, f64>;
/// Reference transcriptions for sequence data.
pub type TextTruth = BTreeMap<String, Vec<String>>;
/// Reference masks for segmentation data.
pub type MaskTruth = BTreeMap<String, Mask>;

/// One categorical response in index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Response {
    pub task: usize,
    pub worker: usize,
    pub label: usize,
}

fn sorted_ids<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<String> {
    ids.collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_owned)
        .collect()
}

fn index_of(ids: &[String], id: &str) -> Option<usize> {
    ids.binary_search_by(|probe| probe.as_str().cmp(id)).ok()
}

/// Long-format categorical responses: one `(task, worker, label)` per row.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationTable {
    tasks: Vec<String>,
    workers: Vec<String>,
    labels: Vec<String>,
    responses: Vec<Response>,
    task_offsets: Vec<usize>,
    worker_rows: Vec<Vec<usize>>,
}

impl AnnotationTable {
    pub fn from_records<I, T, W, L>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, W, L)>,
        T: AsRef<str>,
        W: AsRef<str>,
        L: AsRef<str>,
    {
        let records: Vec<(T, W, L)> = records.into_iter().collect();
        if records.is_empty() {
            return Err(Error::EmptyTable);
        }
        let tasks = sorted_ids(records.iter().map(|r| r.0.as_ref()));
        let workers = sorted_ids(records.iter().map(|r| r.1.as_ref()));
        let labels = sorted_ids(records.iter().map(|r| r.2.as_ref()));

        let mut responses: Vec<Response> = records
            .iter()
            .map(|(t, w, l)| Response {
                task: index_of(&tasks, t.as_ref()).unwrap(),
                worker: index_of(&workers, w.as_ref()).unwrap(),
                label: index_of(&labels, l.as_ref()).unwrap(),
            })
            .collect();
        responses.sort_unstable();
        for pair in responses.windows(2) {
            if pair[0].task == pair[1].task && pair[0].worker == pair[1].worker {
                return Err(Error::DuplicateResponse {
                    task: tasks[pair[0].task].clone(),
                    worker: workers[pair[0].worker].clone(),
                });
            }
        }

        let mut task_offsets = vec![0; tasks.len() + 1];
        for r in &responses {
            task_offsets[r.task + 1] += 1;
        }
        for t in 0..tasks.len() {
            task_offsets[t + 1] += task_offsets[t];
        }
        let mut worker_rows = vec![Vec::new(); workers.len()];
        for (i, r) in responses.iter().enumerate() {
            worker_rows[r.worker].push(i);
        }

        Ok(Self {
            tasks,
            workers,
            labels,
            responses,
            task_offsets,
            worker_rows,
        })
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    pub fn workers(&self) -> &[String] {
        &self.workers
    }

    /// Distinct labels in lexicographic order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn n_workers(&self) -> usize {
        self.workers.len()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    /// Responses sorted by `(task, worker)`.
    pub fn responses(&self) -> &[Response] {
        &self.responses
    }

    pub fn task_responses(&self, task: usize) -> &[Response] {
        &self.responses[self.task_range(task)]
    }

    /// Positions in [`responses`](Self::responses) belonging to `task`.
    pub fn task_range(&self, task: usize) -> std::ops::Range<usize> {
        self.task_offsets[task]..self.task_offsets[task + 1]
    }

    /// Positions in [`responses`](Self::responses) answered by `worker`.
    pub fn worker_rows(&self, worker: usize) -> &[usize] {
        &self.worker_rows[worker]
    }

    pub fn task_index(&self, task: &str) -> Option<usize> {
        index_of(&self.tasks, task)
    }

    pub fn worker_index(&self, worker: &str) -> Option<usize> {
        index_of(&self.workers, worker)
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        index_of(&self.labels, label)
    }

    /// Rows as `(task, worker, label)` string triples, in canonical order.
    pub fn records(&self) -> impl Iterator<Item = (&str, &str, &str)> + '_ {
        self.responses.iter().map(|r| {
            (
                self.tasks[r.task].as_str(),
                self.workers[r.worker].as_str(),
                self.labels[r.label].as_str(),
            )
        })
    }

    /// Per-task vote counts over the label set.
    pub fn vote_counts(&self) -> Vec<Vec<f64>> {
        (0..self.n_tasks())
            .map(|t| {
                let mut counts = vec![0.0; self.n_labels()];
                for r in self.task_responses(t) {
                    counts[r.label] += 1.0;
                }
                counts
            })
            .collect()
    }
}

/// One pairwise comparison in index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Comparison {
    pub worker: usize,
    pub left: usize,
    pub right: usize,
    pub left_won: bool,
}

impl Comparison {
    pub fn winner(&self) -> usize {
        if self.left_won {
            self.left
        } else {
            self.right
        }
    }

    pub fn loser(&self) -> usize {
        if self.left_won {
            self.right
        } else {
            self.left
        }
    }
}

/// `(worker, left, right, winner)` comparison records.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseTable {
    items: Vec<String>,
    workers: Vec<String>,
    comparisons: Vec<Comparison>,
}

impl PairwiseTable {
    pub fn from_records<I, S>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, S, S)>,
        S: AsRef<str>,
    {
        Self::build(records, None)
    }

    /// Like [`from_records`](Self::from_records) but with a declared item universe;
    /// every declared item must take part in at least one comparison.
    pub fn with_items<I, S>(records: I, items: &[&str]) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, S, S)>,
        S: AsRef<str>,
    {
        Self::build(records, Some(items))
    }

    fn build<I, S>(records: I, declared: Option<&[&str]>) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, S, S)>,
        S: AsRef<str>,
    {
        let records: Vec<(S, S, S, S)> = records.into_iter().collect();
        for (row, (_, left, right, winner)) in records.iter().enumerate() {
            let (left, right, winner) = (left.as_ref(), right.as_ref(), winner.as_ref());
            if left == right {
                return Err(Error::InvalidRow {
                    row: row + 1,
                    reason: format!("item `{left}` compared with itself"),
                });
            }
            if winner != left && winner != right {
                return Err(Error::InvalidRow {
                    row: row + 1,
                    reason: format!("winner `{winner}` is neither `{left}` nor `{right}`"),
                });
            }
        }
        let items = sorted_ids(
            records
                .iter()
                .flat_map(|r| [r.1.as_ref(), r.2.as_ref()].into_iter()),
        );
        if let Some(declared) = declared {
            if let Some(unused) = declared.iter().find(|i| index_of(&items, i).is_none()) {
                return Err(Error::UnusedItem(unused.to_string()));
            }
        }
        let workers = sorted_ids(records.iter().map(|r| r.0.as_ref()));
        let comparisons = records
            .iter()
            .map(|(w, l, r, win)| Comparison {
                worker: index_of(&workers, w.as_ref()).unwrap(),
                left: index_of(&items, l.as_ref()).unwrap(),
                right: index_of(&items, r.as_ref()).unwrap(),
                left_won: win.as_ref() == l.as_ref(),
            })
            .collect();
        Ok(Self {
            items,
            workers,
            comparisons,
        })
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn workers(&self) -> &[String] {
        &self.workers
    }

    pub fn comparisons(&self) -> &[Comparison] {
        &self.comparisons
    }

    pub fn is_empty(&self) -> bool {
        self.comparisons.is_empty()
    }

    pub fn item_index(&self, item: &str) -> Option<usize> {
        index_of(&self.items, item)
    }

    /// Rows as `(worker, left, right, winner)`, in input order.
    pub fn records(&self) -> impl Iterator<Item = (&str, &str, &str, &str)> + '_ {
        self.comparisons.iter().map(|c| {
            (
                self.workers[c.worker].as_str(),
                self.items[c.left].as_str(),
                self.items[c.right].as_str(),
                self.items[c.winner()].as_str(),
            )
        })
    }
}

/// One transcription.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceResponse {
    pub task: String,
    pub worker: String,
    pub tokens: Vec<String>,
}

impl SequenceResponse {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Splits on runs of whitespace; case and punctuation are kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

/// Token-sequence responses. Rows keep their input order, which fixes the
/// hypothesis order seen by ROVER.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTable {
    rows: Vec<SequenceResponse>,
    by_task: BTreeMap<String, Vec<usize>>,
    workers: Vec<String>,
}

impl SequenceTable {
    pub fn from_records<I, T, W, X>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, W, X)>,
        T: Into<String>,
        W: Into<String>,
        X: AsRef<str>,
    {
        let mut rows = Vec::new();
        let mut by_task: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (i, (task, worker, text)) in records.into_iter().enumerate() {
            let (task, worker) = (task.into(), worker.into());
            let tokens = tokenize(text.as_ref());
            if tokens.is_empty() {
                return Err(Error::InvalidRow {
                    row: i + 1,
                    reason: format!("empty transcription for task `{task}`"),
                });
            }
            if !seen.insert((task.clone(), worker.clone())) {
                return Err(Error::DuplicateResponse { task, worker });
            }
            by_task.entry(task.clone()).or_default().push(rows.len());
            rows.push(SequenceResponse {
                task,
                worker,
                tokens,
            });
        }
        if rows.is_empty() {
            return Err(Error::EmptyTable);
        }
        let workers = sorted_ids(rows.iter().map(|r| r.worker.as_str()));
        Ok(Self {
            rows,
            by_task,
            workers,
        })
    }

    pub fn rows(&self) -> &[SequenceResponse] {
        &self.rows
    }

    pub fn tasks(&self) -> impl Iterator<Item = &str> + '_ {
        self.by_task.keys().map(String::as_str)
    }

    pub fn n_tasks(&self) -> usize {
        self.by_task.len()
    }

    pub fn workers(&self) -> &[String] {
        &self.workers
    }

    /// Responses to `task` in input order.
    pub fn task_rows(&self, task: &str) -> Vec<&SequenceResponse> {
        self.by_task
            .get(task)
            .map(|ix| ix.iter().map(|&i| &self.rows[i]).collect())
            .unwrap_or_default()
    }

    pub(crate) fn task_row_indices(&self) -> impl Iterator<Item = (&str, &[usize])> + '_ {
        self.by_task.iter().map(|(t, ix)| (t.as_str(), ix.as_slice()))
    }
}

/// Binary `height × width` grid in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    height: usize,
    width: usize,
    cells: Vec<bool>,
}

impl Mask {
    pub fn new(height: usize, width: usize, cells: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter(format!(
                "mask shape {height}x{width} is empty"
            )));
        }
        if cells.len() != height * width {
            return Err(Error::InvalidParameter(format!(
                "mask of shape {height}x{width} needs {} cells, got {}",
                height * width,
                cells.len()
            )));
        }
        Ok(Self {
            height,
            width,
            cells,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, false)
    }

    pub fn filled(height: usize, width: usize, value: bool) -> Self {
        assert!(height > 0 && width > 0, "mask shape must be positive");
        Self {
            height,
            width,
            cells: vec![value; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(height > 0 && width > 0, "mask shape must be positive");
        let cells = (0..height * width).map(|i| f(i / width, i % width)).collect();
        Self {
            height,
            width,
            cells,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.cells[row * self.width + col] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            cells: self.cells.iter().map(|c| !c).collect(),
        }
    }
}

/// All worker masks for one task; every mask has the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    task: String,
    masks: Vec<(String, Mask)>,
}

impl MaskSet {
    pub fn new(task: impl Into<String>, masks: Vec<(String, Mask)>) -> Result<Self> {
        let task = task.into();
        if let Some((_, first)) = masks.first() {
            if masks.iter().any(|(_, m)| m.shape() != first.shape()) {
                return Err(Error::ShapeMismatch(task));
            }
        }
        Ok(Self { task, masks })
    }

    pub fn task(&self) -> &str {
        &self.task
    }

    pub fn masks(&self) -> &[(String, Mask)] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Shape shared by all masks, if any.
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.masks.first().map(|(_, m)| m.shape())
    }
}

/// How an iterative method stopped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub iterations_run: usize,
    pub final_delta: f64,
    /// Objective value after each iteration, when the method tracks one.
    pub log_likelihood: Option<Vec<f64>>,
}

/// Per-task answers plus optional posteriors, worker skills, and convergence info.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationResult<L> {
    pub labels: BTreeMap<String, L>,
    /// Label order of every posterior vector.
    pub label_set: Vec<String>,
    pub posteriors: Option<BTreeMap<String, Vec<f64>>>,
    pub skills: Option<BTreeMap<String, f64>>,
    pub trace: Trace,
}

pub type CategoricalResult = AggregationResult<String>;

impl CategoricalResult {
    pub(crate) fn from_indices(
        table: &AnnotationTable,
        labels: &[usize],
        posteriors: Option<Vec<Vec<f64>>>,
        skills: Option<Vec<f64>>,
        trace: Trace,
    ) -> Self {
        let tasks = table.tasks();
        Self {
            labels: tasks
                .iter()
                .zip(labels)
                .map(|(t, &l)| (t.clone(), table.labels()[l].clone()))
                .collect(),
            label_set: table.labels().to_vec(),
            posteriors: posteriors.map(|p| tasks.iter().cloned().zip(p).collect()),
            skills: skills.map(|s| table.workers().iter().cloned().zip(s).collect()),
            trace,
        }
    }
}

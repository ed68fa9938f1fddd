use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{tokenize, AnnotationTable, CategoricalResult, PairwiseTable, SequenceTable};
use crate::error::{Error, Result};

/// On-disk layout of a record file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Csv,
    Tsv,
    JsonLines,
}

impl RecordFormat {
    /// Guesses from the extension: `.tsv`, `.jsonl`/`.ndjson`, anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("tab") => RecordFormat::Tsv,
            Some("jsonl") | Some("ndjson") => RecordFormat::JsonLines,
            _ => RecordFormat::Csv,
        }
    }
}

/// Column names holding the task, worker and label of a categorical file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSchema {
    pub task: String,
    pub worker: String,
    pub label: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            task: "task".into(),
            worker: "worker".into(),
            label: "label".into(),
        }
    }
}

impl ColumnSchema {
    pub fn new(task: &str, worker: &str, label: &str) -> Self {
        Self {
            task: task.into(),
            worker: worker.into(),
            label: label.into(),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Extracts the named fields from every data row. Row numbers in errors are 1-based
/// line numbers of the source text.
fn read_fields(text: &str, format: RecordFormat, fields: &[&str]) -> Result<Vec<Vec<String>>> {
    match format {
        RecordFormat::Csv | RecordFormat::Tsv => {
            let delimiter = if format == RecordFormat::Tsv { b'\t' } else { b',' };
            let mut reader = csv::ReaderBuilder::new()
                .delimiter(delimiter)
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let header = reader.headers()?.clone();
            let positions = fields
                .iter()
                .map(|f| {
                    header
                        .iter()
                        .position(|h| h == *f)
                        .ok_or_else(|| Error::MissingColumn(f.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut rows = Vec::new();
            for record in reader.records() {
                let record = record?;
                let row = record.position().map_or(0, |p| p.line() as usize);
                let values = positions
                    .iter()
                    .map(|&i| {
                        record
                            .get(i)
                            .map(str::to_owned)
                            .ok_or_else(|| Error::InvalidRow {
                                row,
                                reason: format!("missing value for `{}`", header[i].to_owned()),
                            })
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(values);
            }
            Ok(rows)
        }
        RecordFormat::JsonLines => {
            let mut rows = Vec::new();
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let row = i + 1;
                let value: serde_json::Value =
                    serde_json::from_str(line).map_err(|e| Error::InvalidRow {
                        row,
                        reason: e.to_string(),
                    })?;
                let values = fields
                    .iter()
                    .map(|f| match value.get(*f) {
                        Some(serde_json::Value::String(s)) => Ok(s.clone()),
                        Some(serde_json::Value::Null) | None => {
                            Err(Error::MissingColumn(f.to_string()))
                        }
                        Some(other) => Ok(other.to_string()),
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(values);
            }
            Ok(rows)
        }
    }
}

fn non_empty(rows: Vec<Vec<String>>, path: &Path) -> Result<Vec<Vec<String>>> {
    if rows.is_empty() {
        Err(Error::EmptyFile(path.to_path_buf()))
    } else {
        Ok(rows)
    }
}

pub fn read_categorical_str(
    text: &str,
    format: RecordFormat,
    schema: &ColumnSchema,
) -> Result<AnnotationTable> {
    let rows = read_fields(
        text,
        format,
        &[&schema.task, &schema.worker, &schema.label],
    )?;
    AnnotationTable::from_records(rows.into_iter().map(|r| {
        let mut it = r.into_iter();
        (it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
    }))
}

/// Reads a long-format categorical file (CSV/TSV with header, or JSON lines).
pub fn read_categorical(path: &Path, schema: &ColumnSchema) -> Result<AnnotationTable> {
    let text = read_text(path)?;
    let format = RecordFormat::from_path(path);
    let rows = read_fields(&text, format, &[&schema.task, &schema.worker, &schema.label])?;
    non_empty(rows, path)?;
    read_categorical_str(&text, format, schema)
}

pub fn read_pairwise_str(text: &str, format: RecordFormat) -> Result<PairwiseTable> {
    let rows = read_fields(text, format, &["worker", "left", "right", "winner"])?;
    PairwiseTable::from_records(rows.into_iter().map(|r| {
        let mut it = r.into_iter();
        (
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
        )
    }))
}

pub fn read_pairwise(path: &Path) -> Result<PairwiseTable> {
    let text = read_text(path)?;
    let format = RecordFormat::from_path(path);
    non_empty(read_fields(&text, format, &["worker", "left", "right", "winner"])?, path)?;
    read_pairwise_str(&text, format)
}

pub fn read_sequence_str(text: &str, format: RecordFormat) -> Result<SequenceTable> {
    let rows = read_fields(text, format, &["task", "worker", "text"])?;
    SequenceTable::from_records(rows.into_iter().map(|r| {
        let mut it = r.into_iter();
        (it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
    }))
}

pub fn read_sequence(path: &Path) -> Result<SequenceTable> {
    let text = read_text(path)?;
    let format = RecordFormat::from_path(path);
    non_empty(read_fields(&text, format, &["task", "worker", "text"])?, path)?;
    read_sequence_str(&text, format)
}

fn read_pairs(path: &Path, key: &str, value: &str) -> Result<Vec<(String, String)>> {
    let text = read_text(path)?;
    let rows = non_empty(
        read_fields(&text, RecordFormat::from_path(path), &[key, value])?,
        path,
    )?;
    Ok(rows
        .into_iter()
        .map(|r| {
            let mut it = r.into_iter();
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect())
}

/// `(task, label)` ground truth. Pass other column names for foreign layouts.
pub fn read_ground_truth_labels(
    path: &Path,
    task_column: &str,
    label_column: &str,
) -> Result<BTreeMap<String, String>> {
    Ok(read_pairs(path, task_column, label_column)?
        .into_iter()
        .collect())
}

/// `(item, score)` ground truth.
pub fn read_ground_truth_scores(path: &Path) -> Result<BTreeMap<String, f64>> {
    read_pairs(path, "item", "score")?
        .into_iter()
        .enumerate()
        .map(|(i, (item, score))| {
            score
                .parse::<f64>()
                .map(|s| (item, s))
                .map_err(|e| Error::InvalidRow {
                    row: i + 2,
                    reason: format!("score `{score}`: {e}"),
                })
        })
        .collect()
}

/// `(task, text)` reference transcriptions, tokenized on whitespace.
pub fn read_ground_truth_texts(path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    Ok(read_pairs(path, "task", "text")?
        .into_iter()
        .map(|(t, text)| (t, tokenize(&text)))
        .collect())
}

/// Header plus rows as CSV, creating parent directories.
pub fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// `(task, label)` CSV.
pub fn write_labels(path: &Path, labels: &BTreeMap<String, String>) -> Result<()> {
    write_rows(
        path,
        &["task", "label"],
        labels.iter().map(|(t, l)| [t.as_str(), l.as_str()]),
    )
}

/// `(task, label, probability)` CSV; fails if the result has no posteriors.
pub fn write_posteriors(path: &Path, result: &CategoricalResult) -> Result<()> {
    let posteriors = result.posteriors.as_ref().ok_or(Error::MissingPosteriors)?;
    let rows = posteriors.iter().flat_map(|(task, probs)| {
        result
            .label_set
            .iter()
            .zip(probs)
            .map(move |(label, p)| [task.clone(), label.clone(), p.to_string()])
    });
    write_rows(path, &["task", "label", "probability"], rows)
}

/// `(worker, skill)` CSV.
pub fn write_skills(path: &Path, skills: &BTreeMap<String, f64>) -> Result<()> {
    write_rows(
        path,
        &["worker", "skill"],
        skills.iter().map(|(w, s)| [w.clone(), s.to_string()]),
    )
}

/// `(item, score, rank)` CSV in ranking order; rank starts at 1.
pub fn write_scores(path: &Path, scores: &BTreeMap<String, f64>, ranking: &[String]) -> Result<()> {
    write_rows(
        path,
        &["item", "score", "rank"],
        ranking
            .iter()
            .enumerate()
            .map(|(i, item)| [item.clone(), scores[item].to_string(), (i + 1).to_string()]),
    )
}

/// `(task, text)` CSV with tokens joined by single spaces.
pub fn write_texts(path: &Path, texts: &BTreeMap<String, Vec<String>>) -> Result<()> {
    write_rows(
        path,
        &["task", "text"],
        texts.iter().map(|(t, tokens)| [t.clone(), tokens.join(" ")]),
    )
}

/// `(task, worker, label)` CSV in canonical row order.
pub fn write_annotations(path: &Path, table: &AnnotationTable) -> Result<()> {
    write_rows(
        path,
        &["task", "worker", "label"],
        table.records().map(|(t, w, l)| [t, w, l]),
    )
}

/// `(worker, left, right, winner)` CSV in input order.
pub fn write_comparisons(path: &Path, table: &PairwiseTable) -> Result<()> {
    write_rows(
        path,
        &["worker", "left", "right", "winner"],
        table.records().map(|(w, l, r, x)| [w, l, r, x]),
    )
}

/// `(task, worker, text)` CSV in input order.
pub fn write_transcriptions(path: &Path, table: &SequenceTable) -> Result<()> {
    write_rows(
        path,
        &["task", "worker", "text"],
        table
            .rows()
            .iter()
            .map(|r| [r.task.clone(), r.worker.clone(), r.text()]),
    )
}

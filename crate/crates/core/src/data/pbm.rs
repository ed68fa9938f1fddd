//! ASCII PBM (`P1`) masks and the CSV index that ties them to tasks and workers.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Mask, MaskSet};
use crate::error::{Error, Result};

/// Parses a `P1` bitmap. `1` cells are foreground.
pub fn parse_pbm(text: &str) -> std::result::Result<Mask, String> {
    let mut body = String::with_capacity(text.len());
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        body.push_str(line);
        body.push('\n');
    }
    let mut rest = body.trim_start();
    let next_token = |rest: &mut &str| -> Option<String> {
        let trimmed = rest.trim_start();
        let end = trimmed
            .find(char::is_whitespace)
            .unwrap_or(trimmed.len());
        let (token, tail) = trimmed.split_at(end);
        *rest = tail;
        (!token.is_empty()).then(|| token.to_owned())
    };
    match next_token(&mut rest).as_deref() {
        Some("P1") => {}
        other => return Err(format!("expected magic `P1`, found {other:?}")),
    }
    let mut dim = |name: &str| -> std::result::Result<usize, String> {
        next_token(&mut rest)
            .ok_or_else(|| format!("missing {name}"))?
            .parse::<usize>()
            .map_err(|e| format!("bad {name}: {e}"))
    };
    let width = dim("width")?;
    let height = dim("height")?;
    if width == 0 || height == 0 {
        return Err(format!("empty shape {width}x{height}"));
    }
    let mut cells = Vec::with_capacity(width * height);
    for c in rest.chars().filter(|c| !c.is_whitespace()) {
        match c {
            '0' => cells.push(false),
            '1' => cells.push(true),
            other => return Err(format!("unexpected pixel `{other}`")),
        }
    }
    if cells.len() != width * height {
        return Err(format!(
            "expected {} pixels for {width}x{height}, found {}",
            width * height,
            cells.len()
        ));
    }
    Mask::new(height, width, cells).map_err(|e| e.to_string())
}

pub fn render_pbm(mask: &Mask) -> String {
    let mut out = format!("P1\n{} {}\n", mask.width(), mask.height());
    for row in mask.cells().chunks(mask.width()) {
        let line: Vec<&str> = row.iter().map(|&c| if c { "1" } else { "0" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_pbm(path: &Path) -> Result<Mask> {
    let text = fs::read_to_string(path).map_err(|e| Error::UnreadableMask {
        file: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    parse_pbm(&text).map_err(|reason| Error::UnreadableMask {
        file: path.to_path_buf(),
        reason,
    })
}

pub fn write_pbm(path: &Path, mask: &Mask) -> Result<()> {
    fs::write(path, render_pbm(mask)).map_err(|e| Error::io(path, e))
}

fn file_stem_for(parts: &[&str]) -> String {
    parts
        .iter()
        .map(|p| {
            p.chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("__")
}

/// Reads an index CSV and returns `(task, worker, resolved mask path)` rows.
/// `worker` is `None` for indexes without a worker column (ground truth, outputs).
pub fn read_mask_index(index_path: &Path) -> Result<Vec<(String, Option<String>, PathBuf)>> {
    let text = fs::read_to_string(index_path).map_err(|e| Error::io(index_path, e))?;
    let base = index_path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let task_col = col("task").ok_or_else(|| Error::MissingColumn("task".into()))?;
    let file_col = col("mask_file").ok_or_else(|| Error::MissingColumn("mask_file".into()))?;
    let worker_col = col("worker");
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| {
            record.get(i).map(str::to_owned).ok_or(Error::InvalidRow {
                row,
                reason: "short row".into(),
            })
        };
        let worker = worker_col.map(field).transpose()?;
        rows.push((field(task_col)?, worker, base.join(field(file_col)?)));
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile(index_path.to_path_buf()));
    }
    Ok(rows)
}

/// Loads worker masks grouped by task (tasks in sorted order, workers in index order).
pub fn read_masks(index_path: &Path) -> Result<Vec<MaskSet>> {
    let mut grouped: BTreeMap<String, Vec<(String, Mask)>> = BTreeMap::new();
    for (task, worker, file) in read_mask_index(index_path)? {
        let worker = worker.ok_or_else(|| Error::MissingColumn("worker".into()))?;
        let mask = read_pbm(&file)?;
        let masks = grouped.entry(task.clone()).or_default();
        if masks.iter().any(|(w, _)| *w == worker) {
            return Err(Error::DuplicateResponse { task, worker });
        }
        masks.push((worker, mask));
    }
    grouped
        .into_iter()
        .map(|(task, masks)| MaskSet::new(task, masks))
        .collect()
}

/// Loads one mask per task from an index without a worker column.
pub fn read_mask_map(index_path: &Path) -> Result<BTreeMap<String, Mask>> {
    read_mask_index(index_path)?
        .into_iter()
        .map(|(task, _, file)| Ok((task, read_pbm(&file)?)))
        .collect()
}

fn write_index(index_path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut writer = csv::Writer::from_path(index_path)?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io(index_path, e))
}

/// Writes every worker mask as PBM under `dir` plus `dir/<index_name>`; returns the index path.
pub fn write_mask_index(dir: &Path, index_name: &str, masksets: &[MaskSet]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rows = Vec::new();
    for set in masksets {
        for (worker, mask) in set.masks() {
            let file = format!("{}.pbm", file_stem_for(&[set.task(), worker]));
            write_pbm(&dir.join(&file), mask)?;
            rows.push(vec![set.task().to_owned(), worker.clone(), file]);
        }
    }
    let index = dir.join(index_name);
    write_index(&index, &["task", "worker", "mask_file"], rows)?;
    Ok(index)
}

/// Writes one mask per task (ground truth or aggregates) with a `(task, mask_file)` index.
pub fn write_mask_map(dir: &Path, index_name: &str, masks: &BTreeMap<String, Mask>) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = Path::new(index_name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("mask");
    let mut rows = Vec::new();
    for (task, mask) in masks {
        let file = format!("{}.pbm", file_stem_for(&[stem, task]));
        write_pbm(&dir.join(&file), mask)?;
        rows.push(vec![task.clone(), file]);
    }
    let index = dir.join(index_name);
    write_index(&index, &["task", "mask_file"], rows)?;
    Ok(index)
}

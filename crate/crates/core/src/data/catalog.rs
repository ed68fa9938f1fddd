//! Declarative catalog of known dataset layouts.
//!
//! Loaders only read local files. An entry may declare a base URL and SHA-256
//! sums so that an explicit fetch step can populate the local directory.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    read_categorical, read_ground_truth_labels, read_ground_truth_scores, read_ground_truth_texts,
    read_mask_map, read_masks, read_pairwise, read_sequence, AnnotationTable, ColumnSchema,
    LabelTruth, MaskSet, MaskTruth, PairwiseTable, ScoreTruth, SequenceTable, TextTruth,
};
use crate::error::{Error, Result};
use crate::util::sha256_hex;

const BUILTIN: &str = include_str!("../../data/catalog.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Categorical,
    Pairwise,
    Sequence,
    Segmentation,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Categorical => "categorical",
            Modality::Pairwise => "pairwise",
            Modality::Sequence => "sequence",
            Modality::Segmentation => "segmentation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Columns {
    pub task: String,
    pub worker: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub modality: Modality,
    #[serde(default)]
    pub description: String,
    /// Response file (mask index for segmentation), relative to the dataset directory.
    pub responses: String,
    /// Ground-truth file, relative to the dataset directory.
    #[serde(default)]
    pub truth: Option<String>,
    /// Column names of a categorical response file.
    #[serde(default)]
    pub columns: Option<Columns>,
    /// `(task, label)` column names of a categorical truth file.
    #[serde(default)]
    pub truth_columns: Option<(String, String)>,
    /// Base URL for the optional fetch step.
    #[serde(default)]
    pub url: Option<String>,
    /// Expected SHA-256 per file name.
    #[serde(default)]
    pub sha256: BTreeMap<String, String>,
}

impl CatalogEntry {
    /// Relative paths of every file the entry expects.
    pub fn files(&self) -> Vec<&str> {
        std::iter::once(self.responses.as_str())
            .chain(self.truth.as_deref())
            .collect()
    }

    pub fn verify(&self, file: &str, bytes: &[u8]) -> Result<()> {
        match self.sha256.get(file) {
            Some(expected) => {
                let actual = sha256_hex(bytes);
                if actual.eq_ignore_ascii_case(expected) {
                    Ok(())
                } else {
                    Err(Error::Checksum {
                        file: file.to_owned(),
                        expected: expected.clone(),
                        actual,
                    })
                }
            }
            None => Ok(()),
        }
    }

    fn schema(&self) -> ColumnSchema {
        self.columns
            .as_ref()
            .map(|c| ColumnSchema::new(&c.task, &c.worker, &c.label))
            .unwrap_or_default()
    }

    /// Parses the entry's files under `dir`.
    pub fn load(&self, dir: &Path) -> Result<Dataset> {
        let missing: Vec<String> = self
            .files()
            .into_iter()
            .map(|f| dir.join(f))
            .filter(|p| !p.is_file())
            .map(|p| p.display().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingFiles(missing));
        }
        let responses = dir.join(&self.responses);
        let truth = self.truth.as_ref().map(|t| dir.join(t));
        Ok(match self.modality {
            Modality::Categorical => {
                let (task_col, label_col) = self
                    .truth_columns
                    .clone()
                    .unwrap_or_else(|| ("task".into(), "label".into()));
                Dataset::Categorical {
                    table: read_categorical(&responses, &self.schema())?,
                    truth: truth
                        .map(|p| read_ground_truth_labels(&p, &task_col, &label_col))
                        .transpose()?
                        .unwrap_or_default(),
                }
            }
            Modality::Pairwise => Dataset::Pairwise {
                table: read_pairwise(&responses)?,
                truth: truth
                    .map(|p| read_ground_truth_scores(&p))
                    .transpose()?
                    .unwrap_or_default(),
            },
            Modality::Sequence => Dataset::Sequence {
                table: read_sequence(&responses)?,
                truth: truth
                    .map(|p| read_ground_truth_texts(&p))
                    .transpose()?
                    .unwrap_or_default(),
            },
            Modality::Segmentation => Dataset::Segmentation {
                masks: read_masks(&responses)?,
                truth: truth
                    .map(|p| read_mask_map(&p))
                    .transpose()?
                    .unwrap_or_default(),
            },
        })
    }
}

/// A parsed dataset in its modality's native types, with ground truth
/// (empty when the layout has no truth file).
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Categorical {
        table: AnnotationTable,
        truth: LabelTruth,
    },
    Pairwise {
        table: PairwiseTable,
        truth: ScoreTruth,
    },
    Sequence {
        table: SequenceTable,
        truth: TextTruth,
    },
    Segmentation {
        masks: Vec<MaskSet>,
        truth: MaskTruth,
    },
}

impl Dataset {
    pub fn modality(&self) -> Modality {
        match self {
            Dataset::Categorical { .. } => Modality::Categorical,
            Dataset::Pairwise { .. } => Modality::Pairwise,
            Dataset::Sequence { .. } => Modality::Sequence,
            Dataset::Segmentation { .. } => Modality::Segmentation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Catalog {
    entries: BTreeMap<String, CatalogEntry>,
}

impl Catalog {
    /// The catalog shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN).expect("bundled catalog is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("catalog: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Result<&CatalogEntry> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::UnknownDataset(name.to_owned()))
    }

    pub fn load(&self, name: &str, local_dir: &Path) -> Result<Dataset> {
        self.get(name)?.load(local_dir)
    }
}

/// Loads a catalog dataset from `local_dir` using the built-in catalog.
pub fn load_catalog_dataset(name: &str, local_dir: &Path) -> Result<Dataset> {
    Catalog::builtin().load(name, local_dir)
}

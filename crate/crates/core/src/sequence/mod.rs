//! Aggregation of free-text responses.

mod embed;
mod rasa;
mod rover;

use std::collections::BTreeMap;

pub use embed::{cosine, Embedder, TrigramTfIdf};
pub use rasa::{hrrasa, rasa};
pub use rover::{rover, Wtn};

use crate::data::{AggregationResult, SequenceTable, Trace};
use crate::error::Result;

/// Per-task token lists.
pub type SequenceResult = AggregationResult<Vec<String>>;

/// ROVER applied to every task of `table`, hypotheses in row order.
pub fn rover_table(table: &SequenceTable) -> Result<SequenceResult> {
    let mut labels = BTreeMap::new();
    for task in table.tasks() {
        let hypotheses: Vec<Vec<String>> =
            table.task_rows(task).into_iter().map(|r| r.tokens.clone()).collect();
        labels.insert(task.to_owned(), rover(&hypotheses)?);
    }
    Ok(SequenceResult {
        labels,
        label_set: vec![],
        posteriors: None,
        skills: None,
        trace: Trace::default(),
    })
}

use super::argmax_rows;
use crate::data::{AnnotationTable, CategoricalResult, Trace};

/// Plain majority vote; posteriors are the vote fractions.
pub fn majority_vote(table: &AnnotationTable) -> CategoricalResult {
    let posteriors = vote_fractions(table);
    let labels = argmax_rows(&posteriors);
    CategoricalResult::from_indices(table, &labels, Some(posteriors), None, Trace::default())
}

pub(crate) fn vote_fractions(table: &AnnotationTable) -> Vec<Vec<f64>> {
    table
        .vote_counts()
        .into_iter()
        .map(|counts| {
            let total: f64 = counts.iter().sum();
            counts.into_iter().map(|c| c / total).collect()
        })
        .collect()
}

pub(crate) fn mv_labels(table: &AnnotationTable) -> Vec<usize> {
    argmax_rows(&table.vote_counts())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_to_one() {
        let table =
            AnnotationTable::from_records([("t1", "w1", "a"), ("t1", "w2", "a"), ("t1", "w3", "b")])
                .unwrap();
        let result = majority_vote(&table);
        assert_eq!(result.labels["t1"], "a");
        let p = &result.posteriors.unwrap()["t1"];
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tie_goes_to_smallest_label() {
        let table = AnnotationTable::from_records([("t1", "w1", "b"), ("t1", "w2", "a")]).unwrap();
        assert_eq!(majority_vote(&table).labels["t1"], "a");
    }
}

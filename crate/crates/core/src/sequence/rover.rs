use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Word transition network: aligned slots, one entry per hypothesis, `None` for a gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wtn {
    slots: Vec<Vec<Option<String>>>,
    depth: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    Match,
    Sub,
    Ins,
    Del,
}

impl Wtn {
    pub fn new(base: &[String]) -> Self {
        Self {
            slots: base.iter().map(|t| vec![Some(t.clone())]).collect(),
            depth: 1,
        }
    }

    pub fn slots(&self) -> &[Vec<Option<String>>] {
        &self.slots
    }

    /// Number of hypotheses aligned so far.
    pub fn depth(&self) -> usize {
        self.depth
    }

    fn slot_has(&self, slot: usize, token: &str) -> bool {
        self.slots[slot].iter().any(|e| e.as_deref() == Some(token))
    }

    /// Skipping a slot that already holds a gap is free: the gap is in its multiset.
    fn skip_cost(&self, slot: usize) -> usize {
        usize::from(!self.slots[slot].contains(&None))
    }

    /// Aligns `hyp` against the current slots by minimum edit cost and merges it in.
    pub fn align(&mut self, hyp: &[String]) {
        let (n, m) = (self.slots.len(), hyp.len());
        let mut cost = vec![vec![0usize; m + 1]; n + 1];
        for i in 1..=n {
            cost[i][0] = cost[i - 1][0] + self.skip_cost(i - 1);
        }
        for j in 0..=m {
            cost[0][j] = j;
        }
        for i in 1..=n {
            for j in 1..=m {
                let diag = cost[i - 1][j - 1] + usize::from(!self.slot_has(i - 1, &hyp[j - 1]));
                cost[i][j] = diag
                    .min(cost[i][j - 1] + 1)
                    .min(cost[i - 1][j] + self.skip_cost(i - 1));
            }
        }

        let mut steps = Vec::with_capacity(n + m);
        let (mut i, mut j) = (n, m);
        while i > 0 || j > 0 {
            let here = cost[i][j];
            let step = if i > 0 && j > 0 && self.slot_has(i - 1, &hyp[j - 1]) && cost[i - 1][j - 1] == here {
                Step::Match
            } else if i > 0 && j > 0 && cost[i - 1][j - 1] + 1 == here {
                Step::Sub
            } else if j > 0 && cost[i][j - 1] + 1 == here {
                Step::Ins
            } else {
                Step::Del
            };
            match step {
                Step::Match | Step::Sub => {
                    i -= 1;
                    j -= 1;
                }
                Step::Ins => j -= 1,
                Step::Del => i -= 1,
            }
            steps.push(step);
        }
        steps.reverse();

        let mut old = std::mem::take(&mut self.slots).into_iter();
        let mut tokens = hyp.iter();
        for step in steps {
            let slot = match step {
                Step::Match | Step::Sub => {
                    let mut slot = old.next().unwrap();
                    slot.push(tokens.next().cloned());
                    slot
                }
                Step::Ins => {
                    let mut slot = vec![None; self.depth];
                    slot.push(tokens.next().cloned());
                    slot
                }
                Step::Del => {
                    let mut slot = old.next().unwrap();
                    slot.push(None);
                    slot
                }
            };
            self.slots.push(slot);
        }
        self.depth += 1;
    }

    /// Plurality per slot; ties go to a token over a gap, then to the smaller token.
    pub fn vote(&self) -> Vec<String> {
        let mut out = Vec::new();
        for slot in &self.slots {
            let mut counts: BTreeMap<Option<&str>, usize> = BTreeMap::new();
            for entry in slot {
                *counts.entry(entry.as_deref()).or_default() += 1;
            }
            // map order: gap first, then tokens ascending
            let best = counts.values().copied().max().unwrap_or(0);
            let winner = counts
                .iter()
                .filter(|(_, &c)| c == best)
                .map(|(t, _)| *t)
                .find(Option::is_some)
                .unwrap_or(None);
            if let Some(token) = winner {
                out.push(token.to_owned());
            }
        }
        out
    }
}

/// Recognizer output voting error reduction over one task's hypotheses.
/// The first hypothesis is the alignment base.
pub fn rover(hypotheses: &[Vec<String>]) -> Result<Vec<String>> {
    let (base, rest) = hypotheses.split_first().ok_or(Error::EmptyResponses)?;
    let mut wtn = Wtn::new(base);
    for hyp in rest {
        wtn.align(hyp);
    }
    Ok(wtn.vote())
}

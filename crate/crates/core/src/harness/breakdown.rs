use serde::{Deserialize, Serialize};

use crate::error::{Result, RimError};
use crate::reliability::LabeledSet;
use crate::selection::SelectionTrace;

/// Nodes split by whether they were first activated by a correctly labeled
/// node, an incorrectly labeled one, or never.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationBreakdown {
    pub correct: usize,
    pub incorrect: usize,
    pub inactive: usize,
}

impl ActivationBreakdown {
    pub fn total(&self) -> usize {
        self.correct + self.incorrect + self.inactive
    }
}

pub fn activation_breakdown(
    trace: &SelectionTrace,
    labeled: &LabeledSet,
    ground_truth: &[usize],
) -> Result<ActivationBreakdown> {
    let mut out = ActivationBreakdown::default();
    for activator in &trace.first_activator {
        match activator {
            None => out.inactive += 1,
            Some(a) => {
                let entry = labeled.get(*a).ok_or_else(|| {
                    RimError::validation(format!("activator {a} is not in the labeled set"))
                })?;
                let truth = *ground_truth.get(*a).ok_or(RimError::Index {
                    node: *a,
                    n: ground_truth.len(),
                })?;
                if entry.label == truth {
                    out.correct += 1;
                } else {
                    out.incorrect += 1;
                }
            }
        }
    }
    Ok(out)
}

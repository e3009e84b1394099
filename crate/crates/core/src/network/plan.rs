use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DamageScenario, LineId};

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("line {0} is restored in more than one period")]
    Repeated(LineId),
    #[error("line {0} is restored but was never damaged")]
    NotDamaged(LineId),
    #[error("damaged line {0} is never restored")]
    Missing(LineId),
    #[error("plan has {plan} periods but the schedule has {schedule}")]
    LengthMismatch { plan: usize, schedule: usize },
}

/// Restoration periods `R_1..R_N`; each period is a set of line ids kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RestorationPlan {
    pub periods: Vec<Vec<LineId>>,
}

impl RestorationPlan {
    pub fn new(periods: Vec<Vec<LineId>>) -> Self {
        let periods = periods
            .into_iter()
            .map(|mut p| {
                p.sort();
                p
            })
            .collect();
        RestorationPlan { periods }
    }

    /// One line per period, in the given order.
    pub fn fully_ordered(order: &[LineId]) -> Self {
        RestorationPlan {
            periods: order.iter().map(|&l| vec![l]).collect(),
        }
    }

    /// `n` empty periods.
    pub fn empty(n: usize) -> Self {
        RestorationPlan {
            periods: vec![Vec::new(); n],
        }
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    /// Lines in restoration order: by period, then by id within a period.
    pub fn order(&self) -> Vec<LineId> {
        self.periods.iter().flatten().copied().collect()
    }

    pub fn restored_count(&self) -> usize {
        self.periods.iter().map(Vec::len).sum()
    }

    /// Lines restored in periods `0..=k` (zero-based).
    pub fn restored_through(&self, k: usize) -> BTreeSet<LineId> {
        self.periods[..=k].iter().flatten().copied().collect()
    }

    /// Checks the partition property against a damage set.
    pub fn validate(&self, damage: &DamageScenario) -> Result<(), PlanError> {
        let mut seen = BTreeSet::new();
        for &id in self.periods.iter().flatten() {
            if !damage.contains(id) {
                return Err(PlanError::NotDamaged(id));
            }
            if !seen.insert(id) {
                return Err(PlanError::Repeated(id));
            }
        }
        if let Some(&id) = damage.damaged_lines.iter().find(|id| !seen.contains(id)) {
            return Err(PlanError::Missing(id));
        }
        Ok(())
    }
}

impl fmt::Display for RestorationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, p) in self.periods.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "<")?;
            for (i, id) in p.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{id}")?;
            }
            write!(f, ">")?;
        }
        write!(f, "]")
    }
}

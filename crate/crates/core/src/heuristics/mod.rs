//! Restoration ordering algorithms: the UTIL sort, recursive bisection (RRR),
//! randomized block re-optimization (RAD), the monolithic ROP, and an
//! exhaustive oracle for small damage sets.

mod oracle;
mod rad;
mod rrr;

use std::time::Duration;

use thiserror::Error;

use crate::milp::{MipBackend, MipSolution, SolveOptions};
use crate::models::{build_rop, extract_plan, ModelError};
use crate::network::{DamageScenario, Network, PeriodSchedule, RestorationPlan};

pub use oracle::{brute_force_optimal, ORACLE_MAX_LINES};
pub use rad::{rad, rad_with_stats, RadConfig, RadStats};
pub use rrr::{rrr, rrr_with_stats, RrrStats};

#[derive(Debug, Error, PartialEq)]
pub enum HeuristicError {
    #[error("{0} damaged lines exceed the oracle limit of {ORACLE_MAX_LINES}")]
    TooLarge(usize),
    #[error("oracle needs one period per damaged line ({lines} lines, {periods} periods)")]
    NotFullyOrdered { lines: usize, periods: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Time, gap and seed shared by the algorithms.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgoBudget {
    pub time_limit: Duration,
    pub rel_gap: f64,
    pub seed: u64,
    pub backend: MipBackend,
    /// Run independent sub-problems on the rayon pool.
    pub parallel: bool,
}

impl AlgoBudget {
    pub fn new(time_limit: Duration, rel_gap: f64, seed: u64) -> Self {
        AlgoBudget {
            time_limit,
            rel_gap,
            seed,
            backend: MipBackend::Internal,
            parallel: false,
        }
    }

    pub(crate) fn options(&self, time_limit: Duration) -> SolveOptions {
        SolveOptions {
            time_limit,
            rel_gap: self.rel_gap,
            warm_start: None,
        }
    }
}

/// One line per period, largest thermal rating first. Ties go to the lower
/// `(from_bus, to_bus, id)`.
pub fn util_order(network: &Network, damage: &DamageScenario) -> RestorationPlan {
    let mut lines: Vec<_> = damage
        .damaged_lines
        .iter()
        .filter_map(|id| network.line(*id))
        .collect();
    lines.sort_by(|a, b| {
        b.thermal_limit
            .total_cmp(&a.thermal_limit)
            .then((a.from_bus, a.to_bus, a.id).cmp(&(b.from_bus, b.to_bus, b.id)))
    });
    let order: Vec<_> = lines.iter().map(|l| l.id).collect();
    RestorationPlan::fully_ordered(&order)
}

/// Solves the full ROP, warm-started from `warm` when given. Returns the
/// extracted plan (if an incumbent exists) with the raw solver result.
pub fn solve_rop(
    network: &Network,
    damage: &DamageScenario,
    schedule: &PeriodSchedule,
    budget: &AlgoBudget,
    warm: Option<&RestorationPlan>,
) -> Result<(Option<RestorationPlan>, MipSolution), ModelError> {
    let rop = build_rop(network, damage, schedule)?;
    let mut opts = budget.options(budget.time_limit);
    if let Some(plan) = warm {
        opts.warm_start = Some(rop.assignment_for(plan));
    }
    let sol = budget.backend.solve(&rop.program, &opts);
    let plan = match sol.values {
        Some(_) => Some(extract_plan(&rop, &sol)?),
        None => None,
    };
    Ok((plan, sol))
}

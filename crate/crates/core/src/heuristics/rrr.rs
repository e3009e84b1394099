use std::collections::BTreeSet;
use std::time::Instant;

use super::{util_order, AlgoBudget};
use crate::models::{build_rop, extract_plan};
use crate::network::{build_schedule, round_half_up, DamageScenario, LineId, Network, RestorationPlan};

/// Counters collected over one RRR run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RrrStats {
    /// Two-period ROPs handed to the solver.
    pub sub_solves: usize,
    /// Largest binary count of any sub-problem.
    pub max_binaries: usize,
    /// Objective of the top-level two-period ROP, when it was solved.
    pub top_split_objective: Option<f64>,
    /// Sub-problems that ended without an incumbent and fell back to UTIL halves.
    pub mip_failures: usize,
    /// Sub-problems that restored nothing in the first period.
    pub empty_first_returns: usize,
}

impl RrrStats {
    fn merge(&mut self, other: RrrStats) {
        self.sub_solves += other.sub_solves;
        self.max_binaries = self.max_binaries.max(other.max_binaries);
        self.mip_failures += other.mip_failures;
        self.empty_first_returns += other.empty_first_returns;
    }
}

/// Recursive restoration refinement: split the damage set with a two-period
/// ROP, then order each half recursively with the other half's lines fixed
/// to their status (earlier half in service, later half out of service).
pub fn rrr(network: &Network, damage: &DamageScenario, budget: &AlgoBudget) -> RestorationPlan {
    rrr_with_stats(network, damage, budget).0
}

pub fn rrr_with_stats(network: &Network, damage: &DamageScenario, budget: &AlgoBudget) -> (RestorationPlan, RrrStats) {
    let deadline = Instant::now() + budget.time_limit;
    let mut lines = damage.damaged_lines.clone();
    lines.sort();
    let (order, stats) = split(network, lines, deadline, budget, true);
    (RestorationPlan::fully_ordered(&order), stats)
}

fn util_subset(network: &Network, lines: &[LineId]) -> Vec<LineId> {
    let damage = DamageScenario::from_lines(network, lines).expect("subset lines are in the network");
    util_order(network, &damage).order()
}

fn split(
    network: &Network,
    lines: Vec<LineId>,
    deadline: Instant,
    budget: &AlgoBudget,
    top: bool,
) -> (Vec<LineId>, RrrStats) {
    let mut stats = RrrStats::default();
    if lines.len() <= 1 {
        return (lines, stats);
    }
    let n = lines.len();
    let damage = DamageScenario::from_lines(network, &lines).expect("subset lines are in the network");
    let schedule = build_schedule(n, 2, 1.0);
    let remaining = deadline.saturating_duration_since(Instant::now());
    let rop = build_rop(network, &damage, &schedule).expect("two-period schedule is consistent");
    stats.sub_solves = 1;
    stats.max_binaries = rop.program.num_binaries();
    let sol = budget.backend.solve(&rop.program, &budget.options(remaining / 2));
    if top {
        stats.top_split_objective = sol.objective;
    }

    let halves = match sol.values.as_ref().map(|_| extract_plan(&rop, &sol)) {
        Some(Ok(plan)) => {
            if plan.periods[0].is_empty() {
                stats.empty_first_returns = 1;
                return (util_subset(network, &lines), stats);
            }
            (plan.periods[0].clone(), plan.periods[1].clone())
        }
        _ => {
            stats.mip_failures = 1;
            let order = util_subset(network, &lines);
            let mid = round_half_up(n, 2);
            (order[..mid].to_vec(), order[mid..].to_vec())
        }
    };
    let (first, second) = halves;

    let later: BTreeSet<LineId> = second.iter().copied().collect();
    let first_net = network.without_lines(&later).expect("later lines are in the network");
    let now = Instant::now();
    let first_deadline = (now + deadline.saturating_duration_since(now) / 2).min(deadline);
    let run_first = || split(&first_net, first, first_deadline, budget, false);
    let run_second = || split(network, second, deadline, budget, false);
    let ((mut order, s1), (tail, s2)) = if budget.parallel {
        rayon::join(run_first, run_second)
    } else {
        (run_first(), run_second())
    };
    order.extend(tail);
    stats.merge(s1);
    stats.merge(s2);
    (order, stats)
}

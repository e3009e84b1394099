//! The restoration implementation LP (RIP), the restoration ordering MILP
//! (ROP), plan extraction and plan evaluation.
//!
//! Flows follow the DC convention `P_ij = -b_ij (θ_i - θ_j)`. At every bus,
//! generation minus outgoing flow plus incoming flow equals served load.

mod rip;
mod rop;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LinearProgram, LpStatus, Relation};
use crate::network::{Network, PlanError};

pub use rip::{build_rip, evaluate_plan, PeriodEvaluator};
pub use rop::{build_rop, extract_plan, RopArtifacts};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("plan has {plan} periods but the schedule has {schedule}")]
    LengthMismatch { plan: usize, schedule: usize },
    #[error("schedule is inconsistent: {0}")]
    Schedule(String),
    #[error("LP solve ended with {0:?}")]
    Lp(LpStatus),
    #[error("solution has no incumbent")]
    NoIncumbent,
    #[error("line {line} switches off between periods {period} and {next}", next = period + 1)]
    NotMonotone { line: crate::network::LineId, period: usize },
}

/// Delivered power per period, in per-unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerServedSeries {
    pub delivered: Vec<f64>,
    /// Duration of each period in hours.
    pub delta: Vec<f64>,
    /// `load_fractions[k][d]` is the served share of load `d` in period `k`.
    pub load_fractions: Vec<Vec<f64>>,
}

impl PowerServedSeries {
    pub fn len(&self) -> usize {
        self.delivered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delivered.is_empty()
    }

    /// `Σ delivered_k · Δ_k`.
    pub fn total_energy(&self) -> f64 {
        self.delivered.iter().zip(&self.delta).map(|(p, d)| p * d).sum()
    }
}

/// Variable indices of one DC power flow period.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct PeriodVars {
    pub gen: Vec<usize>,
    /// Indexed by line position; `None` for lines absent from this period.
    pub flow: Vec<Option<usize>>,
    pub load: Vec<usize>,
    pub theta: Vec<usize>,
}

/// Adds generator, flow, load and angle variables for period `k` (1-based
/// in names), nodal balance rows, and the load objective weighted by `weight`.
/// Only lines with `present(pos)` get a flow variable. Angles of buses listed
/// in `reference` are fixed to zero.
pub(crate) fn add_period(
    lp: &mut LinearProgram,
    network: &Network,
    k: usize,
    weight: f64,
    present: &dyn Fn(usize) -> bool,
    reference: &[bool],
) -> PeriodVars {
    let mut vars = PeriodVars::default();
    for g in network.generators() {
        vars.gen.push(lp.add_var(format!("pg_{}_{k}", g.id), 0.0, g.p_max));
    }
    for (pos, l) in network.lines().iter().enumerate() {
        vars.flow.push(present(pos).then(|| {
            let cap = l.flow_capacity();
            lp.add_var(format!("pl_{}_{k}", l.id), -cap, cap)
        }));
    }
    for d in network.loads() {
        let x = lp.add_var(format!("xd_{}_{k}", d.id), 0.0, 1.0);
        lp.set_objective(x, weight * d.p_demand);
        vars.load.push(x);
    }
    for (pos, b) in network.buses().iter().enumerate() {
        let (lo, hi) = if reference[pos] {
            (0.0, 0.0)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        };
        vars.theta.push(lp.add_var(format!("th_{}_{k}", b.id), lo, hi));
    }
    for (pos, b) in network.buses().iter().enumerate() {
        let mut terms: Vec<(usize, f64)> = Vec::new();
        for &g in network.generators_at(pos) {
            terms.push((vars.gen[g], 1.0));
        }
        for &lp_pos in network.lines_at(pos) {
            if let Some(p) = vars.flow[lp_pos] {
                let (from, _) = network.endpoints(lp_pos);
                terms.push((p, if from == pos { -1.0 } else { 1.0 }));
            }
        }
        for &d in network.loads_at(pos) {
            terms.push((vars.load[d], -network.loads()[d].p_demand));
        }
        lp.add_constraint(format!("bal_{}_{k}", b.id), terms, Relation::Eq, 0.0);
    }
    vars
}

/// Adds `P - (-b)(θ_i - θ_j) = 0`, written as `P + b θ_i - b θ_j = 0`.
pub(crate) fn add_flow_equation(lp: &mut LinearProgram, network: &Network, vars: &PeriodVars, pos: usize, k: usize) {
    let l = &network.lines()[pos];
    let (i, j) = network.endpoints(pos);
    let b = l.susceptance_b;
    let p = vars.flow[pos].expect("line has a flow variable");
    lp.add_constraint(
        format!("flow_{}_{k}", l.id),
        vec![(p, 1.0), (vars.theta[i], b), (vars.theta[j], -b)],
        Relation::Eq,
        0.0,
    );
}

pub(crate) fn delivered(network: &Network, vars: &PeriodVars, x: &[f64]) -> (f64, Vec<f64>) {
    let fractions: Vec<f64> = vars.load.iter().map(|&j| x[j]).collect();
    let power = network
        .loads()
        .iter()
        .zip(&fractions)
        .map(|(d, f)| d.p_demand * f)
        .sum();
    (power, fractions)
}

use std::collections::HashMap;

use super::{add_flow_equation, add_period, delivered, ModelError, PowerServedSeries};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Sense, DEFAULT_ITERATION_LIMIT};
use crate::network::{DamageScenario, Network, PeriodSchedule, RestorationPlan};

fn check(damage: &DamageScenario, plan: &RestorationPlan, schedule: &PeriodSchedule) -> Result<(), ModelError> {
    plan.validate(damage)?;
    if plan.n_periods() != schedule.n_periods || schedule.delta.len() != schedule.n_periods {
        return Err(ModelError::LengthMismatch {
            plan: plan.n_periods(),
            schedule: schedule.n_periods,
        });
    }
    Ok(())
}

/// `energized[k][line_pos]`: undamaged lines plus lines restored by period `k`.
fn energized_sets(network: &Network, damage: &DamageScenario, plan: &RestorationPlan) -> Vec<Vec<bool>> {
    let mut on: Vec<bool> = network.lines().iter().map(|l| !damage.contains(l.id)).collect();
    plan.periods
        .iter()
        .map(|period| {
            for id in period {
                on[network.line_position(*id).expect("plan lines belong to the network")] = true;
            }
            on.clone()
        })
        .collect()
}

fn add_energized_period(lp: &mut LinearProgram, network: &Network, k: usize, weight: f64, on: &[bool]) -> super::PeriodVars {
    let roots = network.components(|p| on[p]);
    let reference: Vec<bool> = roots.iter().enumerate().map(|(bus, &r)| r == bus).collect();
    let vars = add_period(lp, network, k, weight, &|p| on[p], &reference);
    for pos in (0..on.len()).filter(|&p| on[p]) {
        add_flow_equation(lp, network, &vars, pos, k);
    }
    vars
}

/// Builds the LP that dispatches a fixed restoration plan. Each period only
/// carries flow variables for its energized lines; the objective is
/// `Σ_k Σ_d Δ_k P^D_d x_dk`.
pub fn build_rip(
    network: &Network,
    damage: &DamageScenario,
    plan: &RestorationPlan,
    schedule: &PeriodSchedule,
) -> Result<LinearProgram, ModelError> {
    check(damage, plan, schedule)?;
    let mut lp = LinearProgram::new(Sense::Maximize);
    for (k, on) in energized_sets(network, damage, plan).iter().enumerate() {
        add_energized_period(&mut lp, network, k + 1, schedule.delta[k], on);
    }
    Ok(lp)
}

/// Solves single-period dispatch problems and remembers the result for each
/// energized line set. The periods of the RIP share no variables, so solving
/// them one at a time gives the same optimum as the joint LP.
#[derive(Debug)]
pub struct PeriodEvaluator<'a> {
    network: &'a Network,
    cache: HashMap<Vec<bool>, (f64, Vec<f64>)>,
}

impl<'a> PeriodEvaluator<'a> {
    pub fn new(network: &'a Network) -> Self {
        PeriodEvaluator {
            network,
            cache: HashMap::new(),
        }
    }

    pub fn network(&self) -> &'a Network {
        self.network
    }

    /// Delivered power and load fractions with exactly the lines in `on` in service.
    pub fn period(&mut self, on: &[bool]) -> Result<(f64, Vec<f64>), ModelError> {
        if let Some(hit) = self.cache.get(on) {
            return Ok(hit.clone());
        }
        let mut lp = LinearProgram::new(Sense::Maximize);
        let vars = add_energized_period(&mut lp, self.network, 1, 1.0, on);
        let sol = solve_lp(&lp, DEFAULT_ITERATION_LIMIT);
        if sol.status != LpStatus::Optimal {
            return Err(ModelError::Lp(sol.status));
        }
        let out = delivered(self.network, &vars, &sol.primal);
        self.cache.insert(on.to_vec(), out.clone());
        Ok(out)
    }

    pub fn evaluate(
        &mut self,
        damage: &DamageScenario,
        plan: &RestorationPlan,
        schedule: &PeriodSchedule,
    ) -> Result<PowerServedSeries, ModelError> {
        check(damage, plan, schedule)?;
        let mut series = PowerServedSeries {
            delivered: Vec::with_capacity(plan.n_periods()),
            delta: schedule.delta.clone(),
            load_fractions: Vec::with_capacity(plan.n_periods()),
        };
        for on in energized_sets(self.network, damage, plan) {
            let (p, x) = self.period(&on)?;
            series.delivered.push(p);
            series.load_fractions.push(x);
        }
        Ok(series)
    }

    pub fn cached_periods(&self) -> usize {
        self.cache.len()
    }
}

/// Delivered power per period under `plan`, from the RIP optimum.
pub fn evaluate_plan(
    network: &Network,
    damage: &DamageScenario,
    plan: &RestorationPlan,
    schedule: &PeriodSchedule,
) -> Result<PowerServedSeries, ModelError> {
    PeriodEvaluator::new(network).evaluate(damage, plan, schedule)
}

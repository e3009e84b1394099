use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::AlgoBudget;
use crate::analysis::monotonize;
use crate::milp::MipSolution;
use crate::models::{build_rop, extract_plan, ModelError, PeriodEvaluator};
use crate::network::{build_schedule, DamageScenario, LineId, Network, RestorationPlan};

#[derive(Clone, Debug, PartialEq)]
pub struct RadConfig {
    pub min_partition: usize,
    pub max_partition: usize,
    /// Initial block time limit as a share of the total time limit.
    pub initial_time_fraction: f64,
    /// Passes in a row without an accepted block before stopping.
    pub stall_limit: usize,
    /// Factor applied to `max_partition` when blocks stop improving quickly.
    pub growth: f64,
    /// Share of blocks that must fail (and hit or miss the time limit) to adapt.
    pub threshold: f64,
}

impl Default for RadConfig {
    fn default() -> Self {
        RadConfig {
            min_partition: 2,
            max_partition: 5,
            initial_time_fraction: 0.01,
            stall_limit: 100,
            growth: 1.10,
            threshold: 0.80,
        }
    }
}

impl RadConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_partition < 2 || self.min_partition > self.max_partition {
            return Err("need 2 <= min_partition <= max_partition".into());
        }
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.initial_time_fraction) || !unit(self.threshold) {
            return Err("fractions must lie in (0, 1]".into());
        }
        if self.growth < 1.0 || !self.growth.is_finite() {
            return Err("growth must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadStats {
    pub passes: usize,
    pub blocks_solved: usize,
    pub blocks_accepted: usize,
    pub time_doublings: usize,
    pub partition_growths: usize,
    pub final_max_partition: usize,
    pub final_block_time: Duration,
    /// ROP objective of every solved block, in solve order.
    pub block_objectives: Vec<f64>,
    /// Raw total energy of the working order after each accepted block.
    pub raw_energy_trace: Vec<f64>,
    /// Post-processed energy of the returned plan.
    pub best_energy: f64,
}

/// Randomized adaptive decomposition starting from `initial`.
pub fn rad(
    network: &Network,
    damage: &DamageScenario,
    budget: &AlgoBudget,
    config: &RadConfig,
    initial: &RestorationPlan,
) -> RestorationPlan {
    rad_with_stats(network, damage, budget, config, initial)
        .map(|r| r.0)
        .unwrap_or_else(|_| initial.clone())
}

struct Block {
    start: usize,
    end: usize,
}

struct BlockResult {
    hit_limit: bool,
    objective: Option<f64>,
    order: Option<Vec<LineId>>,
}

/// Raw energies `P(k)` of each period of a fully-ordered plan with `Δ = 1`.
fn period_powers(eval: &mut PeriodEvaluator, damage: &DamageScenario, order: &[LineId]) -> Result<Vec<f64>, ModelError> {
    let plan = RestorationPlan::fully_ordered(order);
    let schedule = build_schedule(order.len(), order.len(), 1.0);
    Ok(eval.evaluate(damage, &plan, &schedule)?.delivered)
}

fn post_processed(eval: &mut PeriodEvaluator, damage: &DamageScenario, order: &[LineId]) -> Result<f64, ModelError> {
    let plan = RestorationPlan::fully_ordered(order);
    let schedule = build_schedule(order.len(), order.len(), 1.0);
    let raw = eval.evaluate(damage, &plan, &schedule)?;
    let (series, _) = monotonize(&raw, &plan).expect("aligned");
    Ok(series.total_energy())
}

fn solve_block(network: &Network, order: &[LineId], block: &Block, budget: &AlgoBudget, time: Duration) -> BlockResult {
    let failed = |hit_limit| BlockResult {
        hit_limit,
        objective: None,
        order: None,
    };
    let lines = &order[block.start..block.end];
    let later: BTreeSet<LineId> = order[block.end..].iter().copied().collect();
    let Ok(subnet) = network.without_lines(&later) else {
        return failed(false);
    };
    let Ok(damage) = DamageScenario::from_lines(&subnet, lines) else {
        return failed(false);
    };
    let b = lines.len();
    let Ok(rop) = build_rop(&subnet, &damage, &build_schedule(b, b, 1.0)) else {
        return failed(false);
    };
    let mut opts = budget.options(time);
    opts.warm_start = Some(rop.assignment_for(&RestorationPlan::fully_ordered(lines)));
    let sol: MipSolution = budget.backend.solve(&rop.program, &opts);
    let Ok(plan) = extract_plan(&rop, &sol) else {
        return failed(sol.hit_time_limit);
    };
    // Flatten by period; lines sharing a period keep their current relative order.
    let rank: BTreeMap<LineId, usize> = lines.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut flat = Vec::with_capacity(b);
    for mut period in plan.periods {
        period.sort_by_key(|l| rank[l]);
        flat.extend(period);
    }
    BlockResult {
        hit_limit: sol.hit_time_limit,
        objective: sol.objective,
        order: Some(flat),
    }
}

/// Like [`rad`], also returning run statistics.
///
/// The working state is the restoration order of `initial` (periods
/// flattened). Each pass cuts the order into contiguous blocks, re-orders
/// each block with a ROP whose earlier lines are in service and later lines
/// out of service, and keeps a new block order only if it raises the raw
/// energy of the block's periods. The returned plan is the best order seen,
/// by post-processed energy.
pub fn rad_with_stats(
    network: &Network,
    damage: &DamageScenario,
    budget: &AlgoBudget,
    config: &RadConfig,
    initial: &RestorationPlan,
) -> Result<(RestorationPlan, RadStats), ModelError> {
    initial.validate(damage)?;
    let start = Instant::now();
    let deadline = start + budget.time_limit;
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut eval = PeriodEvaluator::new(network);

    let mut order = initial.order();
    let n = order.len();
    let mut powers = period_powers(&mut eval, damage, &order)?;
    let mut best_order = order.clone();
    let mut best = post_processed(&mut eval, damage, &order)?;
    let mut stats = RadStats {
        best_energy: best,
        ..RadStats::default()
    };

    let cap = config.min_partition.max(n / 2);
    let mut s_max = config.max_partition;
    let mut block_time = budget.time_limit.mul_f64(config.initial_time_fraction);
    let mut stall = 0;

    while stall < config.stall_limit && Instant::now() < deadline && n >= 2 {
        stats.passes += 1;
        let mut blocks = Vec::new();
        let mut at = 0;
        while at < n {
            let size = rng.random_range(config.min_partition..=s_max.max(config.min_partition));
            let end = (at + size).min(n);
            if end - at >= 2 {
                blocks.push(Block { start: at, end });
            }
            at = end;
        }
        let time = block_time.min(deadline.saturating_duration_since(Instant::now()));
        let results: Vec<BlockResult> = if budget.parallel {
            blocks
                .par_iter()
                .map(|b| solve_block(network, &order, b, budget, time))
                .collect()
        } else {
            blocks
                .iter()
                .map(|b| solve_block(network, &order, b, budget, time))
                .collect()
        };

        let mut accepted = 0;
        let mut hit_limit = 0;
        for (block, result) in blocks.iter().zip(results) {
            if result.hit_limit {
                hit_limit += 1;
            }
            if let Some(obj) = result.objective {
                stats.block_objectives.push(obj);
            }
            let Some(new_block) = result.order else { continue };
            let mut candidate = order.clone();
            candidate[block.start..block.end].copy_from_slice(&new_block);
            let new_powers = period_powers(&mut eval, damage, &candidate)?;
            let old: f64 = powers[block.start..block.end].iter().sum();
            let new: f64 = new_powers[block.start..block.end].iter().sum();
            if new > old + 1e-9 * old.abs().max(1.0) {
                accepted += 1;
                order = candidate;
                powers = new_powers;
                stats.raw_energy_trace.push(powers.iter().sum());
                let e = post_processed(&mut eval, damage, &order)?;
                if e > best {
                    best = e;
                    best_order = order.clone();
                }
            }
        }
        let solved = blocks.len();
        stats.blocks_solved += solved;
        stats.blocks_accepted += accepted;

        let fail = solved - accepted;
        if solved > 0 && fail as f64 >= config.threshold * solved as f64 {
            if hit_limit as f64 >= config.threshold * solved as f64 {
                block_time *= 2;
                stats.time_doublings += 1;
            } else {
                s_max = ((s_max as f64 * config.growth).ceil() as usize).min(cap).max(s_max);
                stats.partition_growths += 1;
            }
        }
        stall = if accepted == 0 { stall + 1 } else { 0 };
    }

    stats.final_max_partition = s_max;
    stats.final_block_time = block_time;
    stats.best_energy = best;
    let plan = if best_order == initial.order() {
        initial.clone()
    } else {
        RestorationPlan::fully_ordered(&best_order)
    };
    Ok((plan, stats))
}

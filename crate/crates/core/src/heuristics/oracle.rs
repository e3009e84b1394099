use super::HeuristicError;
use crate::analysis::monotonize;
use crate::models::PeriodEvaluator;
use crate::network::{DamageScenario, Network, PeriodSchedule, RestorationPlan};

/// Largest damage set the oracle will enumerate.
pub const ORACLE_MAX_LINES: usize = 7;

/// Rearranges `v` into the next permutation in lexicographic order.
/// Returns false once `v` is the last one.
fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[i - 1] < v[j]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Best fully-ordered plan by post-processed energy, over all orders of the
/// damaged lines. Orders are visited lexicographically and a later order
/// only wins by more than `1e-9` relative, so ties go to the smallest order.
pub fn brute_force_optimal(
    network: &Network,
    damage: &DamageScenario,
    schedule: &PeriodSchedule,
) -> Result<(RestorationPlan, f64), HeuristicError> {
    let lines = damage.len();
    if lines > ORACLE_MAX_LINES {
        return Err(HeuristicError::TooLarge(lines));
    }
    if lines > 0 && schedule.n_periods != lines {
        return Err(HeuristicError::NotFullyOrdered {
            lines,
            periods: schedule.n_periods,
        });
    }
    let mut eval = PeriodEvaluator::new(network);
    let energy_of = |eval: &mut PeriodEvaluator, plan: &RestorationPlan| -> Result<f64, HeuristicError> {
        let raw = eval.evaluate(damage, plan, schedule)?;
        let (series, _) = monotonize(&raw, plan).expect("series and plan are aligned");
        Ok(series.total_energy())
    };
    if lines == 0 {
        let plan = RestorationPlan::empty(schedule.n_periods);
        let e = energy_of(&mut eval, &plan)?;
        return Ok((plan, e));
    }
    let mut order = damage.damaged_lines.clone();
    order.sort();
    let mut best_plan = RestorationPlan::fully_ordered(&order);
    let mut best = energy_of(&mut eval, &best_plan)?;
    while next_permutation(&mut order) {
        let plan = RestorationPlan::fully_ordered(&order);
        let e = energy_of(&mut eval, &plan)?;
        if e > best + 1e-9 * best.abs().max(1.0) {
            best = e;
            best_plan = plan;
        }
    }
    Ok((best_plan, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_schedule, LineId};
    use crate::synthetic::reference_three_bus;

    #[test]
    fn permutations_in_order() {
        let mut v = vec![1, 2, 3];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![1, 3, 2]);
        assert_eq!(seen[5], vec![3, 2, 1]);
    }

    #[test]
    fn reference_grid_prefers_the_large_load() {
        let net = reference_three_bus();
        let damage = DamageScenario::from_lines(&net, &[LineId(1), LineId(2)]).unwrap();
        let (plan, energy) = brute_force_optimal(&net, &damage, &build_schedule(2, 2, 1.0)).unwrap();
        assert_eq!(plan, RestorationPlan::fully_ordered(&[LineId(1), LineId(2)]));
        assert!((energy - 2.8).abs() < 1e-9);
    }

    #[test]
    fn trivial_sizes() {
        let net = reference_three_bus();
        let none = DamageScenario::from_lines(&net, &[]).unwrap();
        let (plan, energy) = brute_force_optimal(&net, &none, &build_schedule(0, 3, 1.0)).unwrap();
        assert_eq!(plan, RestorationPlan::empty(3));
        assert!((energy - 4.5).abs() < 1e-9);

        let one = DamageScenario::from_lines(&net, &[LineId(3)]).unwrap();
        let (plan, _) = brute_force_optimal(&net, &one, &build_schedule(1, 1, 1.0)).unwrap();
        assert_eq!(plan, RestorationPlan::fully_ordered(&[LineId(3)]));
        assert!(brute_force_optimal(&net, &one, &build_schedule(1, 2, 1.0)).is_err());
    }
}

use serde::{Deserialize, Serialize};

/// Period count, durations and cumulative restoration budgets `R_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodSchedule {
    pub n_periods: usize,
    /// Duration of each period in hours.
    pub delta: Vec<f64>,
    /// Cumulative number of restorations allowed by the end of each period.
    pub repair_budget: Vec<usize>,
}

/// `round(num / den)` with halves rounded up, in exact integer arithmetic.
pub fn round_half_up(num: usize, den: usize) -> usize {
    (2 * num + den) / (2 * den)
}

/// Evenly spread budget: `R_k = round_half_up(k * n_damaged / n_periods)`.
///
/// # Panics
/// If `n_periods` is zero or `hours_per_period` is not positive.
pub fn build_schedule(n_damaged: usize, n_periods: usize, hours_per_period: f64) -> PeriodSchedule {
    assert!(n_periods >= 1, "a schedule needs at least one period");
    assert!(
        hours_per_period > 0.0 && hours_per_period.is_finite(),
        "period duration must be positive"
    );
    PeriodSchedule {
        n_periods,
        delta: vec![hours_per_period; n_periods],
        repair_budget: (1..=n_periods)
            .map(|k| round_half_up(k * n_damaged, n_periods))
            .collect(),
    }
}

impl PeriodSchedule {
    pub fn total_hours(&self) -> f64 {
        self.delta.iter().sum()
    }

    /// Same budgets with every duration multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> PeriodSchedule {
        PeriodSchedule {
            n_periods: self.n_periods,
            delta: self.delta.iter().map(|d| d * factor).collect(),
            repair_budget: self.repair_budget.clone(),
        }
    }

    pub(crate) fn is_consistent(&self) -> bool {
        self.n_periods >= 1
            && self.delta.len() == self.n_periods
            && self.repair_budget.len() == self.n_periods
            && self.delta.iter().all(|d| *d > 0.0 && d.is_finite())
            && self.repair_budget.windows(2).all(|w| w[0] <= w[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_per_period_when_counts_match() {
        assert_eq!(build_schedule(5, 5, 1.0).repair_budget, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn coarse_budget_rounds_half_up() {
        assert_eq!(build_schedule(10, 4, 1.0).repair_budget, vec![3, 5, 8, 10]);
        assert_eq!(build_schedule(3, 2, 1.0).repair_budget, vec![2, 3]);
    }

    #[test]
    fn no_damage_gives_zero_budget() {
        let s = build_schedule(0, 3, 1.0);
        assert_eq!(s.repair_budget, vec![0, 0, 0]);
        assert_eq!(s.delta, vec![1.0; 3]);
    }

    proptest! {
        #[test]
        fn budget_is_monotone_and_complete(n in 0usize..200, periods in 1usize..60) {
            let s = build_schedule(n, periods, 1.0);
            prop_assert!(s.repair_budget.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(*s.repair_budget.last().unwrap(), n);
            prop_assert!(s.is_consistent());
        }
    }
}

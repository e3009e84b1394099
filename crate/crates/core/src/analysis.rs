//! Post-processing of restoration plans: monotone power series with
//! re-bucketed restorations, island metrics, and the per-period report.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{evaluate_plan, ModelError, PowerServedSeries};
use crate::network::{DamageScenario, Network, PeriodSchedule, RestorationPlan};

/// Relative drop below the running maximum that counts as a dip.
pub const DIP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("series has {series} periods but the plan has {plan}")]
    LengthMismatch { series: usize, plan: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `Σ delivered_k · Δ_k`.
pub fn total_energy(series: &PowerServedSeries) -> f64 {
    series.total_energy()
}

/// Replaces delivered power by its running maximum, and moves restorations
/// of every run of dipping periods `k..k+m` into period `k+m+1`. A run that
/// reaches the last period is merged into the last period.
pub fn monotonize(
    series: &PowerServedSeries,
    plan: &RestorationPlan,
) -> Result<(PowerServedSeries, RestorationPlan), AnalysisError> {
    let n = series.len();
    if plan.n_periods() != n {
        return Err(AnalysisError::LengthMismatch {
            series: n,
            plan: plan.n_periods(),
        });
    }
    let mut out = series.clone();
    let mut periods = plan.periods.clone();
    let mut best = 0;
    let mut carry: Vec<_> = Vec::new();
    for k in 0..n {
        let raw = series.delivered[k];
        if k > 0 {
            let peak = out.delivered[k - 1];
            out.delivered[k] = peak.max(raw);
            if raw < peak - DIP_TOL * peak.abs().max(1.0) {
                out.load_fractions[k] = series.load_fractions[best].clone();
                carry.append(&mut periods[k]);
                continue;
            }
        }
        if raw >= out.delivered[k] {
            best = k;
        }
        if !carry.is_empty() {
            periods[k].append(&mut carry);
        }
    }
    if !carry.is_empty() {
        periods[n - 1].append(&mut carry);
    }
    Ok((out, RestorationPlan::new(periods)))
}

/// `(island_count, largest_island_size)` per period. Buses without an
/// energized line count as singleton islands.
pub fn island_metrics(network: &Network, damage: &DamageScenario, plan: &RestorationPlan) -> Vec<(usize, usize)> {
    let mut on: Vec<bool> = network.lines().iter().map(|l| !damage.contains(l.id)).collect();
    let n_bus = network.buses().len();
    plan.periods
        .iter()
        .map(|period| {
            for id in period {
                if let Some(p) = network.line_position(*id) {
                    on[p] = true;
                }
            }
            let labels = network.components(|p| on[p]);
            let mut sizes = vec![0usize; n_bus];
            for l in labels {
                sizes[l] += 1;
            }
            let count = sizes.iter().filter(|&&s| s > 0).count();
            (count, sizes.into_iter().max().unwrap_or(0))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestorationReport {
    pub algorithm: String,
    /// Post-processed plan.
    pub plan: RestorationPlan,
    /// Monotonized series.
    pub series: PowerServedSeries,
    /// Series of the plan as produced by the algorithm, before post-processing.
    pub raw_series: PowerServedSeries,
    pub total_energy: f64,
    pub island_count: Vec<usize>,
    pub largest_island: Vec<usize>,
    pub wall_time_s: f64,
}

impl RestorationReport {
    /// Evaluates `plan`, post-processes it and computes island metrics on the
    /// re-bucketed plan.
    pub fn build(
        network: &Network,
        damage: &DamageScenario,
        plan: &RestorationPlan,
        schedule: &PeriodSchedule,
        algorithm: &str,
        wall_time_s: f64,
    ) -> Result<Self, AnalysisError> {
        let raw = evaluate_plan(network, damage, plan, schedule)?;
        let (series, plan) = monotonize(&raw, plan)?;
        let (island_count, largest_island) = island_metrics(network, damage, &plan).into_iter().unzip();
        Ok(RestorationReport {
            algorithm: algorithm.to_string(),
            plan,
            total_energy: series.total_energy(),
            series,
            raw_series: raw,
            island_count,
            largest_island,
            wall_time_s,
        })
    }

    /// One row per period: `period, delivered_pu, cumulative_energy_pu,
    /// island_count, largest_island, restored_line_ids`.
    pub fn write_csv(&self, out: impl Write) -> Result<(), AnalysisError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "period",
            "delivered_pu",
            "cumulative_energy_pu",
            "island_count",
            "largest_island",
            "restored_line_ids",
        ])?;
        let mut cumulative = 0.0;
        for k in 0..self.series.len() {
            cumulative += self.series.delivered[k] * self.series.delta[k];
            let ids: Vec<String> = self.plan.periods[k].iter().map(|l| l.to_string()).collect();
            w.write_record([
                (k + 1).to_string(),
                self.series.delivered[k].to_string(),
                cumulative.to_string(),
                self.island_count[k].to_string(),
                self.largest_island[k].to_string(),
                ids.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Bus, BusId, Generator, Line, LineId, Load, DEFAULT_ANGLE_DIFF_MAX};

    fn series(values: &[f64]) -> PowerServedSeries {
        PowerServedSeries {
            delivered: values.to_vec(),
            delta: vec![1.0; values.len()],
            load_fractions: vec![Vec::new(); values.len()],
        }
    }

    fn ids(v: &[u32]) -> Vec<LineId> {
        v.iter().map(|&i| LineId(i)).collect()
    }

    #[test]
    fn running_max_example() {
        let plan = RestorationPlan::fully_ordered(&ids(&[1, 2, 3, 4, 5]));
        let (s, _) = monotonize(&series(&[0.0, 5.0, 3.0, 4.0, 7.0]), &plan).unwrap();
        assert_eq!(s.delivered, vec![0.0, 5.0, 5.0, 5.0, 7.0]);
    }

    #[test]
    fn dips_are_rebucketed() {
        let plan = RestorationPlan::fully_ordered(&ids(&[1, 2, 3, 4]));
        let (s, p) = monotonize(&series(&[5.0, 3.0, 4.0, 7.0]), &plan).unwrap();
        assert_eq!(s.delivered, vec![5.0, 5.0, 5.0, 7.0]);
        assert_eq!(p, RestorationPlan::new(vec![ids(&[1]), vec![], vec![], ids(&[2, 3, 4])]));
    }

    #[test]
    fn terminal_dip_merges_into_the_last_period() {
        let plan = RestorationPlan::fully_ordered(&ids(&[1, 2, 3]));
        let (s, p) = monotonize(&series(&[2.0, 1.0, 1.5]), &plan).unwrap();
        assert_eq!(s.delivered, vec![2.0, 2.0, 2.0]);
        assert_eq!(p, RestorationPlan::new(vec![ids(&[1]), vec![], ids(&[2, 3])]));
    }

    #[test]
    fn monotone_input_is_unchanged() {
        let plan = RestorationPlan::fully_ordered(&ids(&[1, 2, 3]));
        let s = series(&[1.0, 1.0, 2.0]);
        let (m, p) = monotonize(&s, &plan).unwrap();
        assert_eq!(m, s);
        assert_eq!(p, plan);
        assert!(monotonize(&s, &RestorationPlan::empty(2)).is_err());
    }

    fn path4() -> Network {
        let line = |id: u32, f: u32, t: u32| Line {
            id: LineId(id),
            from_bus: BusId(f),
            to_bus: BusId(t),
            susceptance_b: -10.0,
            thermal_limit: 1.0,
            angle_diff_max: DEFAULT_ANGLE_DIFF_MAX,
        };
        Network::new(
            100.0,
            (1..=4).map(|i| Bus { id: BusId(i), name: i.to_string() }).collect(),
            vec![line(1, 1, 2), line(2, 2, 3), line(3, 3, 4)],
            vec![Generator { id: 1, bus: BusId(1), p_max: 1.0 }],
            vec![Load { id: 1, bus: BusId(4), p_demand: 0.5 }],
        )
        .unwrap()
    }

    #[test]
    fn islands_on_a_path() {
        let net = path4();
        let damage = DamageScenario::from_lines(&net, &ids(&[1, 2, 3])).unwrap();
        let plan = RestorationPlan::fully_ordered(&ids(&[1, 3, 2]));
        assert_eq!(island_metrics(&net, &damage, &plan), vec![(3, 2), (2, 2), (1, 4)]);
        let none = RestorationPlan::new(vec![vec![], ids(&[1, 2, 3])]);
        assert_eq!(island_metrics(&net, &damage, &none)[0], (4, 1));
    }

    #[test]
    fn report_csv() {
        let net = path4();
        let damage = DamageScenario::from_lines(&net, &ids(&[1, 3])).unwrap();
        let plan = RestorationPlan::new(vec![ids(&[1]), ids(&[3])]);
        let schedule = crate::network::build_schedule(2, 2, 1.0);
        let r = RestorationReport::build(&net, &damage, &plan, &schedule, "util", 0.0).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "period,delivered_pu,cumulative_energy_pu,island_count,largest_island,restored_line_ids\n\
             1,0,0,2,3,1\n2,0.5,0.5,1,4,3\n"
        );
        assert_eq!(r.total_energy, 0.5);
    }
}

use std::collections::{BTreeMap, BTreeSet};

use super::{add_flow_equation, add_period, ModelError, PeriodVars};
use crate::lp::{LinearProgram, Relation, Sense};
use crate::milp::{MipSolution, MixedIntegerProgram};
use crate::network::{DamageScenario, LineId, Network, PeriodSchedule, RestorationPlan};

/// The ROP together with the index maps needed to read and seed it.
#[derive(Clone, Debug)]
pub struct RopArtifacts {
    pub program: MixedIntegerProgram,
    /// Damaged lines in ascending id order; rows of `z`.
    pub damaged: Vec<LineId>,
    /// `z[i][k]`: status of `damaged[i]` in period `k`.
    pub z: Vec<Vec<usize>>,
    /// `gen[k][g]`, `flow[k][line_pos]`, `load[k][d]`, `theta[k][bus_pos]`.
    pub gen: Vec<Vec<usize>>,
    pub flow: Vec<Vec<usize>>,
    pub load: Vec<Vec<usize>>,
    pub theta: Vec<Vec<usize>>,
    /// Sum of angle-difference limits over all lines.
    pub theta_delta: f64,
    /// `|b_ij| · theta_delta` for each entry of `damaged`.
    pub big_m: Vec<f64>,
    pub schedule: PeriodSchedule,
}

impl RopArtifacts {
    pub fn n_periods(&self) -> usize {
        self.schedule.n_periods
    }

    /// Binary values that encode `plan`: `z = 1` from the restoration period on.
    pub fn assignment_for(&self, plan: &RestorationPlan) -> BTreeMap<usize, f64> {
        let mut period_of: BTreeMap<LineId, usize> = BTreeMap::new();
        for (k, p) in plan.periods.iter().enumerate() {
            for &id in p {
                period_of.insert(id, k);
            }
        }
        let mut out = BTreeMap::new();
        for (i, id) in self.damaged.iter().enumerate() {
            let from = period_of.get(id).copied().unwrap_or(usize::MAX);
            for (k, &var) in self.z[i].iter().enumerate() {
                out.insert(var, if k >= from { 1.0 } else { 0.0 });
            }
        }
        out
    }

    /// Copy of the program with every binary fixed to encode `plan`.
    pub fn fixed_to(&self, plan: &RestorationPlan) -> MixedIntegerProgram {
        let mut mip = self.program.clone();
        for (var, v) in self.assignment_for(plan) {
            mip.base.variables[var].lower = v;
            mip.base.variables[var].upper = v;
        }
        mip
    }
}

/// Builds the ordering MILP. Undamaged lines carry equality flow rows in
/// every period; damaged lines use Big-M rows switched by `z`.
pub fn build_rop(
    network: &Network,
    damage: &DamageScenario,
    schedule: &PeriodSchedule,
) -> Result<RopArtifacts, ModelError> {
    let n = schedule.n_periods;
    if !schedule.is_consistent() {
        return Err(ModelError::Schedule("lengths, durations or budgets are invalid".into()));
    }
    if schedule.repair_budget[n - 1] != damage.len() {
        return Err(ModelError::Schedule(format!(
            "final budget {} differs from {} damaged lines",
            schedule.repair_budget[n - 1],
            damage.len()
        )));
    }
    let mut damaged: Vec<LineId> = damage.damaged_lines.clone();
    damaged.sort();
    let damaged_pos: Vec<usize> = damaged
        .iter()
        .map(|id| {
            network
                .line_position(*id)
                .ok_or_else(|| ModelError::Schedule(format!("damaged line {id} is not in the network")))
        })
        .collect::<Result<_, _>>()?;
    let is_damaged: BTreeSet<usize> = damaged_pos.iter().copied().collect();

    let theta_delta: f64 = network.lines().iter().map(|l| l.angle_diff_max).sum();
    let big_m: Vec<f64> = damaged_pos
        .iter()
        .map(|&p| network.lines()[p].susceptance_b.abs() * theta_delta)
        .collect();

    let roots = network.components(|_| true);
    let reference: Vec<bool> = roots.iter().enumerate().map(|(bus, &r)| r == bus).collect();

    let mut lp = LinearProgram::new(Sense::Maximize);
    let periods: Vec<PeriodVars> = (0..n)
        .map(|k| {
            let vars = add_period(&mut lp, network, k + 1, schedule.delta[k], &|_| true, &reference);
            for pos in (0..network.lines().len()).filter(|p| !is_damaged.contains(p)) {
                add_flow_equation(&mut lp, network, &vars, pos, k + 1);
            }
            vars
        })
        .collect();

    let z: Vec<Vec<usize>> = damaged
        .iter()
        .map(|id| {
            (0..n)
                .map(|k| {
                    let lo = if k == n - 1 { 1.0 } else { 0.0 };
                    lp.add_var(format!("z_{id}_{}", k + 1), lo, 1.0)
                })
                .collect()
        })
        .collect();

    for (i, &pos) in damaged_pos.iter().enumerate() {
        let l = &network.lines()[pos];
        let (a, b_bus) = network.endpoints(pos);
        let b = l.susceptance_b;
        let cap = l.flow_capacity();
        let m = big_m[i];
        for (k, vars) in periods.iter().enumerate() {
            let p = vars.flow[pos].expect("ROP has flow variables for every line");
            let zk = z[i][k];
            let (ta, tb) = (vars.theta[a], vars.theta[b_bus]);
            let tag = format!("{}_{}", l.id, k + 1);
            lp.add_constraint(
                format!("bigm_up_{tag}"),
                vec![(p, 1.0), (ta, b), (tb, -b), (zk, m)],
                Relation::Le,
                m,
            );
            lp.add_constraint(
                format!("bigm_lo_{tag}"),
                vec![(p, 1.0), (ta, b), (tb, -b), (zk, -m)],
                Relation::Ge,
                -m,
            );
            lp.add_constraint(format!("onoff_up_{tag}"), vec![(p, 1.0), (zk, -cap)], Relation::Le, 0.0);
            lp.add_constraint(format!("onoff_lo_{tag}"), vec![(p, 1.0), (zk, cap)], Relation::Ge, 0.0);
            if k + 1 < n {
                lp.add_constraint(
                    format!("keep_{tag}"),
                    vec![(zk, 1.0), (z[i][k + 1], -1.0)],
                    Relation::Le,
                    0.0,
                );
            }
        }
    }
    for k in 0..n {
        if !z.is_empty() {
            lp.add_constraint(
                format!("budget_{}", k + 1),
                z.iter().map(|row| (row[k], 1.0)).collect(),
                Relation::Le,
                schedule.repair_budget[k] as f64,
            );
        }
    }

    let binaries = z.iter().flatten().copied().collect();
    let flow = periods
        .iter()
        .map(|v| v.flow.iter().map(|f| f.expect("flow variable")).collect())
        .collect();
    let (gen, load, theta) = periods
        .into_iter()
        .map(|v| (v.gen, v.load, v.theta))
        .fold((Vec::new(), Vec::new(), Vec::new()), |mut acc, (g, l, t)| {
            acc.0.push(g);
            acc.1.push(l);
            acc.2.push(t);
            acc
        });
    Ok(RopArtifacts {
        program: MixedIntegerProgram::new(lp, binaries),
        damaged,
        z,
        gen,
        flow,
        load,
        theta,
        theta_delta,
        big_m,
        schedule: schedule.clone(),
    })
}

/// Reads the restoration periods off the incumbent: a line is restored in
/// the first period where its rounded status becomes 1.
pub fn extract_plan(artifacts: &RopArtifacts, solution: &MipSolution) -> Result<RestorationPlan, ModelError> {
    let x = solution.values.as_ref().ok_or(ModelError::NoIncumbent)?;
    let n = artifacts.n_periods();
    let mut periods = vec![Vec::new(); n];
    for (i, id) in artifacts.damaged.iter().enumerate() {
        let row = &artifacts.z[i];
        for k in 0..n.saturating_sub(1) {
            if x[row[k]] - x[row[k + 1]] > 1e-6 {
                return Err(ModelError::NotMonotone { line: *id, period: k + 1 });
            }
        }
        let first = row.iter().position(|&v| x[v] >= 0.5).unwrap_or(n - 1);
        periods[first].push(*id);
    }
    Ok(RestorationPlan::new(periods))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve_mip, MipStatus, SolveOptions};
    use crate::models::evaluate_plan;
    use crate::network::build_schedule;
    use crate::synthetic::reference_three_bus;
    use std::time::Duration;

    fn lines(ids: &[u32]) -> Vec<LineId> {
        ids.iter().map(|&i| LineId(i)).collect()
    }

    fn exact() -> SolveOptions {
        SolveOptions::new(Duration::from_secs(30), 0.0).unwrap()
    }

    #[test]
    fn binary_count_and_big_m() {
        let net = reference_three_bus();
        let damage = DamageScenario::from_lines(&net, &lines(&[1, 2, 3])).unwrap();
        let rop = build_rop(&net, &damage, &build_schedule(3, 3, 1.0)).unwrap();
        assert_eq!(rop.program.num_binaries(), 9);
        let theta_delta = 3.0 * std::f64::consts::FRAC_PI_6;
        assert!((rop.theta_delta - theta_delta).abs() < 1e-12);
        assert!((rop.big_m[0] - 10.0 * theta_delta).abs() < 1e-9);
        assert!((rop.big_m[2] - 5.0 * theta_delta).abs() < 1e-9);
    }

    #[test]
    fn solves_the_reference_grid() {
        let net = reference_three_bus();
        let damage = DamageScenario::from_lines(&net, &lines(&[1, 2])).unwrap();
        let schedule = build_schedule(2, 2, 1.0);
        let rop = build_rop(&net, &damage, &schedule).unwrap();
        let sol = solve_mip(&rop.program, &exact());
        assert_eq!(sol.status, MipStatus::OptimalWithinGap);
        let plan = extract_plan(&rop, &sol).unwrap();
        assert_eq!(plan, RestorationPlan::fully_ordered(&lines(&[1, 2])));
        assert!((sol.objective.unwrap() - 2.8).abs() < 1e-6);
    }

    #[test]
    fn fixed_assignment_matches_the_rip() {
        let net = reference_three_bus();
        let damage = DamageScenario::from_lines(&net, &lines(&[1, 2, 3])).unwrap();
        let schedule = build_schedule(3, 3, 1.0);
        let rop = build_rop(&net, &damage, &schedule).unwrap();
        let plan = RestorationPlan::fully_ordered(&lines(&[2, 3, 1]));
        let sol = solve_mip(&rop.fixed_to(&plan), &exact());
        let rip = evaluate_plan(&net, &damage, &plan, &schedule).unwrap();
        assert!((sol.objective.unwrap() - rip.total_energy()).abs() < 1e-6);
        assert_eq!(extract_plan(&rop, &sol).unwrap(), plan);
    }

    #[test]
    fn extraction_examples() {
        let net = reference_three_bus();
        let damage = DamageScenario::from_lines(&net, &lines(&[1, 2])).unwrap();
        let rop = build_rop(&net, &damage, &build_schedule(2, 2, 1.0)).unwrap();
        let n = rop.program.base.num_vars();
        let with = |z: [[f64; 2]; 2]| {
            let mut x = vec![0.0; n];
            for i in 0..2 {
                for k in 0..2 {
                    x[rop.z[i][k]] = z[i][k];
                }
            }
            MipSolution {
                values: Some(x),
                ..MipSolution::failed(Duration::ZERO, false)
            }
        };
        let plan = extract_plan(&rop, &with([[0.0, 1.0], [1.0, 1.0]])).unwrap();
        assert_eq!(plan, RestorationPlan::new(vec![lines(&[2]), lines(&[1])]));
        let plan = extract_plan(&rop, &with([[1.0, 1.0], [1.0, 1.0]])).unwrap();
        assert_eq!(plan, RestorationPlan::new(vec![lines(&[1, 2]), vec![]]));
        assert!(matches!(
            extract_plan(&rop, &with([[1.0, 0.0], [1.0, 1.0]])),
            Err(ModelError::NotMonotone { .. })
        ));
    }

    #[test]
    fn inconsistent_schedule() {
        let net = reference_three_bus();
        let damage = DamageScenario::from_lines(&net, &lines(&[1, 2])).unwrap();
        assert!(build_rop(&net, &damage, &build_schedule(3, 2, 1.0)).is_err());
    }
}

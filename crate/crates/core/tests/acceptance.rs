//! Acceptance gate. Each test prints one `ACCEPTANCE <n> PASS|FAIL` line to
//! stderr (uncaptured) and then asserts its criterion.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::Duration;

use common::{instance, rel_diff, report, small_instance};
use gridrestore::analysis::monotonize;
use gridrestore::bench::{cmd_solve, Algorithm, DamageSpec, RunConfig};
use gridrestore::heuristics::{
    brute_force_optimal, rad_with_stats, rrr_with_stats, util_order, AlgoBudget, RadConfig,
};
use gridrestore::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense, DEFAULT_ITERATION_LIMIT};
use gridrestore::milp::{solve_mip, MipStatus, SolveOptions};
use gridrestore::models::{build_rop, evaluate_plan, extract_plan, PeriodEvaluator, PowerServedSeries};
use gridrestore::network::{
    build_schedule, parse_case, Bus, BusId, DamageScenario, Generator, Line, LineId, Load, Network,
    RestorationPlan, DEFAULT_ANGLE_DIFF_MAX,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, ok: bool, detail: &str) {
    report(&format!("ACCEPTANCE {n} {}: {detail}", if ok { "PASS" } else { "FAIL" }));
    assert!(ok, "criterion {n}: {detail}");
}

fn post_processed(net: &Network, damage: &DamageScenario, plan: &RestorationPlan) -> f64 {
    let schedule = build_schedule(damage.len(), plan.n_periods(), 1.0);
    let raw = evaluate_plan(net, damage, plan, &schedule).unwrap();
    monotonize(&raw, plan).unwrap().0.total_energy()
}

fn exact(secs: u64) -> SolveOptions {
    SolveOptions::new(Duration::from_secs(secs), 0.0).unwrap()
}

#[test]
fn criterion_01_rop_matches_oracle() {
    let mut worst: f64 = 0.0;
    let mut raw_short = 0;
    for i in 0..25 {
        let (net, damage) = small_instance(i);
        let l = damage.len();
        let schedule = build_schedule(l, l, 1.0);
        let (_, oracle) = brute_force_optimal(&net, &damage, &schedule).unwrap();
        let rop = build_rop(&net, &damage, &schedule).unwrap();
        let sol = solve_mip(&rop.program, &exact(120));
        assert_eq!(sol.status, MipStatus::OptimalWithinGap, "instance {i}");
        let plan = extract_plan(&rop, &sol).unwrap();
        let energy = post_processed(&net, &damage, &plan);
        worst = worst.max(rel_diff(energy, oracle));
        if rel_diff(sol.objective.unwrap(), oracle) > 1e-6 {
            raw_short += 1;
        }
    }
    verdict(
        1,
        worst <= 1e-6,
        &format!(
            "25 instances, worst relative difference {worst:.2e}; raw ROP objective below the oracle on {raw_short} (final-period dips)"
        ),
    );
}

#[test]
fn criterion_02_rrr_near_optimal() {
    let mut ratios = Vec::new();
    let mut beats_util = 0;
    for i in 0..25 {
        let (net, damage) = small_instance(i);
        let l = damage.len();
        let (_, oracle) = brute_force_optimal(&net, &damage, &build_schedule(l, l, 1.0)).unwrap();
        let budget = AlgoBudget::new(Duration::from_secs(60), 0.0, i);
        let (plan, _) = rrr_with_stats(&net, &damage, &budget);
        let rrr = post_processed(&net, &damage, &plan);
        let util = post_processed(&net, &damage, &util_order(&net, &damage));
        ratios.push(rrr / oracle);
        if rrr >= util - 1e-9 * util.abs().max(1.0) {
            beats_util += 1;
        }
    }
    let near = ratios.iter().filter(|&&r| r >= 0.97).count();
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let ok = near * 10 >= 9 * 25 && beats_util * 100 >= 95 * 25;
    verdict(
        2,
        ok,
        &format!(
            ">=97% of oracle on {near}/25, >= UTIL on {beats_util}/25; ratio min {:.4} median {:.4}",
            sorted[0], sorted[12]
        ),
    );
}

/// Best two-period energy over all first-period subsets of size <= ceil(L/2).
fn two_period_enumeration(net: &Network, damage: &DamageScenario) -> f64 {
    let lines: Vec<LineId> = damage.damaged_lines.clone();
    let l = lines.len();
    let half = l.div_ceil(2);
    let mut eval = PeriodEvaluator::new(net);
    let full = eval.period(&vec![true; net.lines().len()]).unwrap().0;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << l) {
        if mask.count_ones() as usize > half {
            continue;
        }
        let on: Vec<bool> = net
            .lines()
            .iter()
            .map(|line| match lines.iter().position(|&id| id == line.id) {
                Some(k) => mask & (1 << k) != 0,
                None => true,
            })
            .collect();
        best = best.max(eval.period(&on).unwrap().0 + full);
    }
    best
}

#[test]
fn criterion_03_top_split_is_optimal() {
    let mut worst: f64 = 0.0;
    for i in 0..10u64 {
        let damaged = 3 + (i as usize % 5);
        let (net, damage) = instance(8, 12, damaged, 300 + i);
        let budget = AlgoBudget::new(Duration::from_secs(120), 0.0, i);
        let (_, stats) = rrr_with_stats(&net, &damage, &budget);
        let top = stats.top_split_objective.expect("top split solved");
        worst = worst.max(rel_diff(top, two_period_enumeration(&net, &damage)));
    }
    verdict(3, worst <= 1e-6, &format!("10 instances with 3-7 damaged lines, worst relative difference {worst:.2e}"));
}

#[test]
fn criterion_04_subproblem_sizes() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (l, buses, lines) in [(4usize, 8usize, 12usize), (8, 10, 16), (16, 14, 24)] {
        let (net, damage) = instance(buses, lines, l, 40 + l as u64);
        let budget = AlgoBudget::new(Duration::from_secs(120), 0.01, 0);
        let (plan, stats) = rrr_with_stats(&net, &damage, &budget);
        plan.validate(&damage).unwrap();
        let monolithic = build_rop(&net, &damage, &build_schedule(l, l, 1.0))
            .unwrap()
            .program
            .num_binaries();
        ok &= stats.max_binaries <= 2 * l && stats.sub_solves <= 2 * l - 1 && monolithic == l * l;
        detail.push(format!(
            "L={l}: {} sub-solves, max {} binaries vs {monolithic} monolithic",
            stats.sub_solves, stats.max_binaries
        ));
    }
    verdict(4, ok, &detail.join("; "));
}

#[test]
fn criterion_05_monotonization() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.random_range(1..=12);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0f64)).collect();
        let lines: Vec<LineId> = (1..=n as u32).map(LineId).collect();
        let plan = RestorationPlan::fully_ordered(&lines);
        let series = PowerServedSeries {
            delivered: raw.clone(),
            delta: vec![1.0; n],
            load_fractions: vec![Vec::new(); n],
        };
        let (m, p) = monotonize(&series, &plan).unwrap();
        let mut peak = f64::NEG_INFINITY;
        let expect: Vec<f64> = raw
            .iter()
            .map(|&v| {
                peak = peak.max(v);
                peak
            })
            .collect();
        let valid = p.n_periods() == n
            && p.validate(&DamageScenario {
                damaged_lines: lines.clone(),
                seed: 0,
                fraction: 1.0,
            })
            .is_ok();
        ok &= m.delivered == expect && valid;
    }
    verdict(5, ok, "100 random series equal their running maximum; re-bucketed plans are valid partitions");
}

/// Maximum of `c·x` over the vertices of `{rows, lo <= x <= hi}`.
fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    // Each candidate hyperplane: (coefficients, rhs).
    let mut eqs: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut ineqs: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.terms {
            a[j] += v;
        }
        match c.relation {
            Relation::Eq => eqs.push((a, c.rhs)),
            _ => ineqs.push((a, c.rhs)),
        }
    }
    for (j, v) in lp.variables.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        ineqs.push((e.clone(), v.lower));
        ineqs.push((e, v.upper));
    }
    let need = n.checked_sub(eqs.len())?;
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..need).collect();
    loop {
        let mut rows: Vec<(Vec<f64>, f64)> = eqs.clone();
        rows.extend(pick.iter().map(|&k| ineqs[k].clone()));
        if let Some(x) = solve_square(rows) {
            let feasible = lp.max_row_violation(&x) <= 1e-9 && lp.max_bound_violation(&x) <= 1e-9;
            if feasible {
                let v = lp.objective_value(&x);
                let v = if lp.sense == Sense::Maximize { v } else { -v };
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
        // next combination
        let mut i = need;
        loop {
            if i == 0 {
                let b = best?;
                return Some(if lp.sense == Sense::Maximize { b } else { -b });
            }
            i -= 1;
            if pick[i] < ineqs.len() - need + i {
                pick[i] += 1;
                for k in i + 1..need {
                    pick[k] = pick[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_square(mut rows: Vec<(Vec<f64>, f64)>) -> Option<Vec<f64>> {
    let n = rows.len();
    for col in 0..n {
        let p = (col..n).max_by(|&a, &b| rows[a].0[col].abs().total_cmp(&rows[b].0[col].abs()))?;
        if rows[p].0[col].abs() < 1e-9 {
            return None;
        }
        rows.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = rows[r].0[col] / rows[col].0[col];
                if f != 0.0 {
                    let (pivot_a, pivot_b) = (rows[col].0.clone(), rows[col].1);
                    for (x, y) in rows[r].0.iter_mut().zip(&pivot_a) {
                        *x -= f * y;
                    }
                    rows[r].1 -= f * pivot_b;
                }
            }
        }
    }
    Some((0..n).map(|i| rows[i].1 / rows[i].0[i]).collect())
}

fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.random_range(1..=5);
    let m = rng.random_range(1..=5);
    let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let mut lp = LinearProgram::new(sense);
    let mut x0 = Vec::new();
    for j in 0..n {
        let lo = rng.random_range(-3.0..1.0f64).round();
        let hi = lo + rng.random_range(1.0..5.0f64).round();
        lp.add_var(format!("x{j}"), lo, hi);
        x0.push(rng.random_range(lo..=hi));
        lp.set_objective(j, rng.random_range(-5.0..5.0f64).round());
    }
    for i in 0..m {
        let terms: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.random_range(-4.0..4.0f64).round())).collect();
        let act: f64 = terms.iter().map(|&(j, a)| a * x0[j]).sum();
        let (rel, rhs) = match rng.random_range(0..4) {
            0 => (Relation::Eq, act),
            1 => (Relation::Ge, act - rng.random_range(0.0..2.0)),
            _ => (Relation::Le, act + rng.random_range(0.0..2.0)),
        };
        lp.add_constraint(format!("r{i}"), terms, rel, rhs);
    }
    lp
}

#[test]
fn criterion_06_lp_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 50 {
        let lp = random_lp(&mut rng);
        let Some(oracle) = vertex_oracle(&lp) else { continue };
        let sol = solve_lp(&lp, DEFAULT_ITERATION_LIMIT);
        assert_eq!(sol.status, LpStatus::Optimal);
        worst = worst.max((sol.objective_value - oracle).abs() / oracle.abs().max(1.0));
        checked += 1;
    }

    let mut infeasible = LinearProgram::new(Sense::Maximize);
    let x = infeasible.add_var("x", 0.0, 10.0);
    let y = infeasible.add_var("y", 0.0, 10.0);
    infeasible.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
    infeasible.add_constraint("b", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 2.0);
    let mut unbounded = LinearProgram::new(Sense::Maximize);
    let x = unbounded.add_var("x", 0.0, f64::INFINITY);
    let y = unbounded.add_var("y", 0.0, f64::INFINITY);
    unbounded.add_constraint("a", vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
    unbounded.set_objective(x, 1.0);
    let inf = solve_lp(&infeasible, DEFAULT_ITERATION_LIMIT).status;
    let unb = solve_lp(&unbounded, DEFAULT_ITERATION_LIMIT).status;
    let ok = worst <= 1e-6 && inf == LpStatus::Infeasible && unb == LpStatus::Unbounded;
    verdict(
        6,
        ok,
        &format!("50 random LPs vs vertex enumeration, worst error {worst:.2e}; fixtures {inf:?}/{unb:?}"),
    );
}

/// Two parallel detours whose weak last legs are damaged: energizing either
/// leg pulls flow onto a 0.1 p.u. line and cuts the deliverable load.
fn braess_fixture() -> (Network, DamageScenario) {
    let line = |id: u32, f: u32, t: u32, rate: f64| Line {
        id: LineId(id),
        from_bus: BusId(f),
        to_bus: BusId(t),
        susceptance_b: -10.0,
        thermal_limit: rate,
        angle_diff_max: DEFAULT_ANGLE_DIFF_MAX,
    };
    let net = Network::new(
        100.0,
        (1..=4).map(|i| Bus { id: BusId(i), name: i.to_string() }).collect(),
        vec![line(1, 1, 2, 1.0), line(2, 1, 3, 10.0), line(3, 3, 2, 0.1), line(4, 1, 4, 10.0), line(5, 4, 2, 0.1)],
        vec![Generator { id: 1, bus: BusId(1), p_max: 10.0 }],
        vec![Load { id: 1, bus: BusId(2), p_demand: 2.0 }],
    )
    .unwrap();
    let damage = DamageScenario::from_lines(&net, &[LineId(3), LineId(5)]).unwrap();
    (net, damage)
}

#[test]
fn criterion_07_fallback_paths() {
    let (net, damage) = instance(10, 16, 9, 77);
    let (plan, stats) = rrr_with_stats(&net, &damage, &AlgoBudget::new(Duration::ZERO, 0.0, 0));
    let util = util_order(&net, &damage);
    let same_bytes = serde_json::to_vec(&plan).unwrap() == serde_json::to_vec(&util).unwrap();
    let all_failed = stats.mip_failures == stats.sub_solves && stats.sub_solves > 0;

    let (bnet, bdamage) = braess_fixture();
    let (bplan, bstats) = rrr_with_stats(&bnet, &bdamage, &AlgoBudget::new(Duration::from_secs(30), 0.0, 0));
    let empty_branch = bstats.empty_first_returns == 1 && bplan == util_order(&bnet, &bdamage);
    verdict(
        7,
        same_bytes && all_failed && empty_branch,
        &format!(
            "zero budget: plan identical to UTIL ({} failed sub-solves); empty first split returned the UTIL order",
            stats.mip_failures
        ),
    );
}

#[test]
fn criterion_08_rad_behaviour() {
    let mut never_worse = 0;
    for run in 0..50u64 {
        let (net, damage) = small_instance(run % 25);
        let init = util_order(&net, &damage);
        let cfg = RadConfig {
            stall_limit: 3,
            ..RadConfig::default()
        };
        let budget = AlgoBudget::new(Duration::from_secs(30), 0.0, run);
        let (plan, _) = rad_with_stats(&net, &damage, &budget, &cfg, &init).unwrap();
        plan.validate(&damage).unwrap();
        let before = post_processed(&net, &damage, &init);
        if post_processed(&net, &damage, &plan) >= before - 1e-12 {
            never_worse += 1;
        }
    }

    let (net, damage) = instance(10, 16, 10, 88);
    let init = util_order(&net, &damage);
    let starved = RadConfig {
        initial_time_fraction: 1e-12,
        stall_limit: 2,
        ..RadConfig::default()
    };
    let budget = AlgoBudget::new(Duration::from_secs(30), 0.0, 1);
    let (_, slow) = rad_with_stats(&net, &damage, &budget, &starved, &init).unwrap();
    let roomy = RadConfig {
        initial_time_fraction: 1.0,
        stall_limit: 2,
        ..RadConfig::default()
    };
    let (net, damage) = instance(14, 24, 16, 89);
    let init = util_order(&net, &damage);
    let (_, fast) = rad_with_stats(&net, &damage, &budget, &roomy, &init).unwrap();
    let ok = never_worse == 50 && slow.time_doublings >= 1 && fast.partition_growths >= 1 && fast.final_max_partition > RadConfig::default().max_partition;
    verdict(
        8,
        ok,
        &format!(
            "{never_worse}/50 runs kept or improved the initial energy; time doublings {}, partition growths {} (max partition {} -> {})",
            slow.time_doublings, fast.partition_growths, RadConfig::default().max_partition, fast.final_max_partition
        ),
    );
}

fn solve_once(dir: &Path, parallel: bool) -> (Vec<u8>, Vec<u8>) {
    let case = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/case24_synth.m");
    let mut cfg = RunConfig::new(case, DamageSpec::Fraction(0.2), Algorithm::Rrr);
    cfg.seed = 11;
    cfg.rel_gap = 0.0;
    cfg.time_limit = Duration::from_secs(600);
    cfg.parallel = parallel;
    cfg.out_dir = Some(dir.to_path_buf());
    cmd_solve(&cfg).unwrap();
    (
        fs::read(dir.join("report.csv")).unwrap(),
        fs::read(dir.join("summary.json")).unwrap(),
    )
}

#[test]
fn criterion_09_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let a = solve_once(&tmp.path().join("a"), true);
    let b = solve_once(&tmp.path().join("b"), true);
    let c = solve_once(&tmp.path().join("c"), false);
    verdict(
        9,
        a == b && a == c,
        "two parallel runs and one serial run of solve wrote byte-identical report.csv and summary.json",
    );
}

#[test]
fn criterion_10_parser_golden_files() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut matched = BTreeSet::new();
    for name in ["status", "angles", "rates"] {
        let parsed = parse_case(&fs::read_to_string(dir.join(format!("{name}.m"))).unwrap()).unwrap();
        let expected = Network::from_json(&fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap();
        if parsed == expected {
            matched.insert(name);
        } else {
            report(&format!("golden mismatch in {name}:\n{}", parsed.to_json()));
        }
    }
    verdict(10, matched.len() == 3, &format!("golden cases matched: {matched:?}"));
}

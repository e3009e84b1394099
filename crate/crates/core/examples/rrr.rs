//! Recursive two-period splitting on a random grid, compared with the
//! rating-ordered baseline.

use std::time::{Duration, Instant};

use gridrestore::analysis::RestorationReport;
use gridrestore::heuristics::{rrr_with_stats, util_order, AlgoBudget};
use gridrestore::network::{build_schedule, random_damage};
use gridrestore::synthetic::{random_network, SyntheticSpec};

fn main() {
    let net = random_network(&SyntheticSpec::new(30, 45), 7);
    let damage = random_damage(&net, 0.3, 7).unwrap();
    let schedule = build_schedule(damage.len(), damage.len(), 1.0);
    let budget = AlgoBudget::new(Duration::from_secs(30), 0.01, 7);

    let start = Instant::now();
    let (plan, stats) = rrr_with_stats(&net, &damage, &budget);
    let rrr = RestorationReport::build(&net, &damage, &plan, &schedule, "rrr", start.elapsed().as_secs_f64()).unwrap();
    let util = RestorationReport::build(&net, &damage, &util_order(&net, &damage), &schedule, "util", 0.0).unwrap();

    println!("{} damaged lines", damage.len());
    println!("util energy {:.4}", util.total_energy);
    println!("rrr  energy {:.4} in {:.2}s", rrr.total_energy, rrr.wall_time_s);
    println!(
        "{} sub-solves, at most {} binaries each, {} fallbacks",
        stats.sub_solves, stats.max_binaries, stats.mip_failures
    );
    println!("order {:?}", plan.order().iter().map(|l| l.0).collect::<Vec<_>>());
}

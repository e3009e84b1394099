//! Block-wise local search starting from the rating-ordered baseline.

use std::time::Duration;

use gridrestore::analysis::RestorationReport;
use gridrestore::heuristics::{rad_with_stats, util_order, AlgoBudget, RadConfig};
use gridrestore::network::{build_schedule, random_damage};
use gridrestore::synthetic::{random_network, SyntheticSpec};

fn main() {
    let net = random_network(&SyntheticSpec::new(30, 45), 11);
    let damage = random_damage(&net, 0.3, 11).unwrap();
    let schedule = build_schedule(damage.len(), damage.len(), 1.0);
    let init = util_order(&net, &damage);
    let budget = AlgoBudget::new(Duration::from_secs(20), 0.0, 11);
    let cfg = RadConfig {
        stall_limit: 5,
        ..RadConfig::default()
    };

    let (plan, stats) = rad_with_stats(&net, &damage, &budget, &cfg, &init).unwrap();
    let before = RestorationReport::build(&net, &damage, &init, &schedule, "util", 0.0).unwrap();
    let after = RestorationReport::build(&net, &damage, &plan, &schedule, "rad", 0.0).unwrap();
    println!("energy {:.4} -> {:.4}", before.total_energy, after.total_energy);
    println!(
        "{} passes, {}/{} blocks accepted, partition cap {}, block time {:?}",
        stats.passes, stats.blocks_accepted, stats.blocks_solved, stats.final_max_partition, stats.final_block_time
    );
}

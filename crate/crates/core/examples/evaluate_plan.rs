//! Evaluate a hand-written restoration plan on the 3-bus reference grid and
//! compare it with the ordering MILP optimum.

use std::time::Duration;

use gridrestore::milp::{solve_mip, SolveOptions};
use gridrestore::models::{build_rop, evaluate_plan, extract_plan};
use gridrestore::network::{build_schedule, DamageScenario, LineId, RestorationPlan};
use gridrestore::synthetic::reference_three_bus;

fn main() {
    let net = reference_three_bus();
    let damage = DamageScenario::from_lines(&net, &[LineId(1), LineId(2)]).unwrap();
    let schedule = build_schedule(damage.len(), 2, 1.0);

    for order in [[1, 2], [2, 1]] {
        let plan = RestorationPlan::fully_ordered(&order.map(LineId));
        let series = evaluate_plan(&net, &damage, &plan, &schedule).unwrap();
        println!("order {order:?}: delivered {:?}, energy {}", series.delivered, series.total_energy());
    }

    let rop = build_rop(&net, &damage, &schedule).unwrap();
    let sol = solve_mip(&rop.program, &SolveOptions::new(Duration::from_secs(10), 0.0).unwrap());
    let plan = extract_plan(&rop, &sol).unwrap();
    println!(
        "ROP: {} binaries, big-M per line {:.3?}, objective {:?}, plan {:?}",
        rop.program.num_binaries(),
        rop.big_m,
        sol.objective,
        plan.periods
    );
}

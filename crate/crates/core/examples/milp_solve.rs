//! Solve a 0/1 knapsack with the branch-and-bound engine.

use std::time::Duration;

use gridrestore::lp::{LinearProgram, Relation, Sense};
use gridrestore::milp::{solve_mip, MixedIntegerProgram, SolveOptions};

fn main() {
    let values = [10.0, 13.0, 7.0, 8.0, 4.0, 9.0];
    let weights = [5.0, 6.0, 3.0, 4.0, 2.0, 5.0];
    let mut lp = LinearProgram::new(Sense::Maximize);
    for (j, v) in values.iter().enumerate() {
        let k = lp.add_var(format!("take{j}"), 0.0, 1.0);
        lp.set_objective(k, *v);
    }
    lp.add_constraint("weight", weights.iter().copied().enumerate().collect(), Relation::Le, 14.0);
    let mip = MixedIntegerProgram::new(lp, (0..values.len()).collect());

    let opts = SolveOptions::new(Duration::from_secs(10), 0.0).unwrap();
    let sol = solve_mip(&mip, &opts);
    println!("{:?}: objective {:?}, bound {}, {} nodes", sol.status, sol.objective, sol.best_bound, sol.nodes);
    let x = sol.values.unwrap();
    let chosen: Vec<usize> = (0..values.len()).filter(|&j| x[j] > 0.5).collect();
    println!("items {chosen:?}");
}

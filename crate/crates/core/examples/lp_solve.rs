//! Build a small LP, solve it with the simplex engine and print the MPS text.

use std::collections::BTreeSet;

use gridrestore::lp::{solve_lp, write_mps, LinearProgram, Relation, Sense, DEFAULT_ITERATION_LIMIT};

fn main() {
    // max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x <= 3
    let mut lp = LinearProgram::new(Sense::Maximize);
    let x = lp.add_var("x", 0.0, 3.0);
    let y = lp.add_var("y", 0.0, f64::INFINITY);
    lp.set_objective(x, 3.0);
    lp.set_objective(y, 2.0);
    lp.add_constraint("cap", vec![(x, 1.0), (y, 1.0)], Relation::Le, 4.0);
    lp.add_constraint("mix", vec![(x, 1.0), (y, 3.0)], Relation::Le, 6.0);

    let sol = solve_lp(&lp, DEFAULT_ITERATION_LIMIT);
    println!("{:?} objective={} x={:?} after {} pivots", sol.status, sol.objective_value, sol.primal, sol.iterations);
    print!("{}", write_mps(&lp, &BTreeSet::new()));
}

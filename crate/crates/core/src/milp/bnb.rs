//! Best-bound branch-and-bound.
//!
//! Internally every objective is turned into a score to maximize
//! (`score = sign · objective`). A node stores the binaries fixed on its path
//! and the LP bound of its parent; it is solved when popped.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{relative_gap, MipSolution, MipStatus, MixedIntegerProgram, SolveOptions, INTEGRALITY_TOL};
use crate::lp::{solve_lp_with_bounds, LpStatus, Sense, DEFAULT_ITERATION_LIMIT};

struct Node {
    bound: f64,
    seq: usize,
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap: higher bound first, then older node first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    mip: &'a MixedIntegerProgram,
    sign: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    incumbent: Option<(f64, Vec<f64>)>,
}

enum NodeResult {
    Pruned,
    Integral(f64, Vec<f64>),
    Branch(f64, usize),
    Unbounded,
    Incomplete,
}

impl Search<'_> {
    fn solve_node(&self, fixings: &[(usize, f64)]) -> NodeResult {
        let mut lo = self.lower.clone();
        let mut hi = self.upper.clone();
        for &(j, v) in fixings {
            lo[j] = v;
            hi[j] = v;
        }
        let sol = solve_lp_with_bounds(&self.mip.base, &lo, &hi, DEFAULT_ITERATION_LIMIT);
        match sol.status {
            LpStatus::Infeasible => NodeResult::Pruned,
            LpStatus::Unbounded => NodeResult::Unbounded,
            LpStatus::IterationLimit => NodeResult::Incomplete,
            LpStatus::Optimal => {
                let score = self.sign * sol.objective_value;
                let mut pick: Option<(f64, usize)> = None;
                for &j in &self.mip.binary_vars {
                    let frac = (sol.primal[j] - sol.primal[j].round()).abs();
                    if frac > INTEGRALITY_TOL && pick.is_none_or(|(f, _)| frac > f) {
                        pick = Some((frac, j));
                    }
                }
                match pick {
                    None => NodeResult::Integral(score, sol.primal),
                    Some((_, j)) => NodeResult::Branch(score, j),
                }
            }
        }
    }

    /// Nodes whose bound does not beat the incumbent by more than this are dropped.
    fn prune_margin(&self, rel_gap: f64) -> Option<f64> {
        self.incumbent.as_ref().map(|(inc, _)| {
            let scale = inc.abs().max(1e-10);
            inc + (rel_gap * scale).max(1e-9 * inc.abs().max(1.0))
        })
    }
}

/// Solves `mip` by branch-and-bound over the simplex engine.
pub fn solve_mip(mip: &MixedIntegerProgram, opts: &SolveOptions) -> MipSolution {
    let start = Instant::now();
    if mip.validate().is_err() {
        return MipSolution::failed(start.elapsed(), false);
    }
    let sign = match mip.base.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut search = Search {
        mip,
        sign,
        lower: mip.base.variables.iter().map(|v| v.lower).collect(),
        upper: mip.base.variables.iter().map(|v| v.upper).collect(),
        incumbent: None,
    };

    if let Some(warm) = &opts.warm_start {
        let fixings: Vec<(usize, f64)> = mip
            .binary_vars
            .iter()
            .filter_map(|&j| warm.get(&j).map(|&v| (j, if v >= 0.5 { 1.0 } else { 0.0 })))
            .collect();
        if fixings.len() == mip.binary_vars.len() {
            if let NodeResult::Integral(score, x) = search.solve_node(&fixings) {
                search.incumbent = Some((score, x));
            }
        }
    }

    let mut queue = BinaryHeap::new();
    let mut seq = 0;
    queue.push(Node {
        bound: f64::INFINITY,
        seq,
        fixings: Vec::new(),
    });
    let mut nodes = 0;
    let mut pruned_bound = f64::NEG_INFINITY;
    let mut incomplete = false;
    let mut hit_time_limit = false;
    let mut trace = Vec::new();

    loop {
        let inc_score = search.incumbent.as_ref().map(|i| i.0);
        let open_bound = queue.peek().map_or(f64::NEG_INFINITY, |n| n.bound);
        let bound = open_bound.max(pruned_bound).max(inc_score.unwrap_or(f64::NEG_INFINITY));
        if let Some(inc) = inc_score {
            if queue.is_empty() || relative_gap(bound, inc) <= opts.rel_gap {
                break;
            }
        } else if queue.is_empty() {
            break;
        }
        if start.elapsed() >= opts.time_limit {
            hit_time_limit = true;
            break;
        }

        let node = queue.pop().expect("queue is nonempty");
        if search.prune_margin(opts.rel_gap).is_some_and(|m| node.bound <= m) {
            pruned_bound = pruned_bound.max(node.bound);
            continue;
        }
        nodes += 1;
        match search.solve_node(&node.fixings) {
            NodeResult::Pruned => {}
            NodeResult::Unbounded => {
                let mut s = MipSolution::failed(start.elapsed(), false);
                s.nodes = nodes;
                return s;
            }
            NodeResult::Incomplete => incomplete = true,
            NodeResult::Integral(score, x) => {
                let score = score.min(node.bound);
                if inc_score.is_none_or(|inc| score > inc) {
                    search.incumbent = Some((score, x));
                }
            }
            NodeResult::Branch(score, j) => {
                let score = score.min(node.bound);
                if search.prune_margin(opts.rel_gap).is_some_and(|m| score <= m) {
                    pruned_bound = pruned_bound.max(score);
                } else {
                    for v in [0.0, 1.0] {
                        seq += 1;
                        let mut fixings = node.fixings.clone();
                        fixings.push((j, v));
                        queue.push(Node {
                            bound: score,
                            seq,
                            fixings,
                        });
                    }
                }
            }
        }
        let open_bound = queue.peek().map_or(f64::NEG_INFINITY, |n| n.bound);
        let inc = search.incumbent.as_ref().map(|i| i.0);
        let bound = open_bound.max(pruned_bound).max(inc.unwrap_or(f64::NEG_INFINITY));
        trace.push((sign * bound, inc.map(|s| sign * s)));
    }

    let elapsed = start.elapsed();
    let open_bound = queue.peek().map_or(f64::NEG_INFINITY, |n| n.bound);
    match search.incumbent {
        Some((score, x)) => {
            // An exhausted tree proves optimality; nodes pruned within the
            // 1e-9 tolerance do not count against the bound.
            let exhausted = queue.is_empty() && !incomplete && !hit_time_limit;
            let bound = if exhausted {
                score
            } else {
                open_bound.max(pruned_bound).max(score)
            };
            let gap = relative_gap(bound, score);
            let proven = exhausted || (gap <= opts.rel_gap && !incomplete);
            MipSolution {
                status: if proven {
                    MipStatus::OptimalWithinGap
                } else {
                    MipStatus::FeasibleTimeLimit
                },
                objective: Some(mip.base.objective_value(&x)),
                best_bound: sign * bound,
                gap: Some(gap),
                values: Some(x),
                elapsed,
                nodes,
                hit_time_limit,
                trace,
            }
        }
        None => {
            let status = if hit_time_limit || incomplete {
                MipStatus::Failure
            } else {
                MipStatus::Infeasible
            };
            MipSolution {
                status,
                objective: None,
                best_bound: if status == MipStatus::Infeasible {
                    sign * f64::NEG_INFINITY
                } else {
                    f64::NAN
                },
                gap: None,
                values: None,
                elapsed,
                nodes,
                hit_time_limit,
                trace,
            }
        }
    }
}

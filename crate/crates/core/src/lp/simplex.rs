//! Dense-tableau primal simplex over bounded variables.
//!
//! Each row `a·x` gets a logical variable `w = a·x` whose bounds encode the
//! relation (`<=`, `=`, `>=`), so every row of the working system is an
//! equality with zero right-hand side and the logicals give a starting basis.
//! Phase 1 minimizes the sum of bound violations of basic variables; phase 2
//! optimizes the objective. Dantzig pricing is used until a run of degenerate
//! pivots is seen, after which Bland's rule takes over until progress resumes.

use super::{LinearProgram, LpSolution, LpStatus, Relation, Sense, FEASIBILITY_TOL, OPTIMALITY_TOL, PIVOT_TOL};

pub const DEFAULT_ITERATION_LIMIT: usize = 200_000;

/// Violations below this are ignored when choosing phase-1 costs.
const PHASE1_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;
const BLAND_AFTER: usize = 30;
const REFRESH_EVERY: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

struct Tableau {
    m: usize,
    n: usize,
    width: usize,
    t: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    head: Vec<usize>,
    cost: Vec<f64>,
    /// Structural columns of the constraint matrix as (row, coefficient).
    columns: Vec<Vec<(usize, f64)>>,
}

impl Tableau {
    fn new(lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> Self {
        let m = lp.constraints.len();
        let n = lp.variables.len();
        let width = n + m;
        let mut t = vec![0.0; m * width];
        let mut columns = vec![Vec::new(); n];
        for (i, c) in lp.constraints.iter().enumerate() {
            for &(j, a) in &c.terms {
                // Canonical row: -a·x + w = 0.
                t[i * width + j] -= a;
            }
            t[i * width + n + i] = 1.0;
        }
        for i in 0..m {
            for j in 0..n {
                let a = -t[i * width + j];
                if a != 0.0 {
                    columns[j].push((i, a));
                }
            }
        }

        let mut lo = Vec::with_capacity(width);
        let mut hi = Vec::with_capacity(width);
        lo.extend_from_slice(lower);
        hi.extend_from_slice(upper);
        for c in &lp.constraints {
            let (l, h) = match c.relation {
                Relation::Le => (f64::NEG_INFINITY, c.rhs),
                Relation::Ge => (c.rhs, f64::INFINITY),
                Relation::Eq => (c.rhs, c.rhs),
            };
            lo.push(l);
            hi.push(h);
        }

        let mut x = vec![0.0; width];
        let mut state = vec![State::Basic; width];
        for j in 0..n {
            (x[j], state[j]) = if lo[j].is_finite() {
                (lo[j], State::AtLower)
            } else if hi[j].is_finite() {
                (hi[j], State::AtUpper)
            } else {
                (0.0, State::Free)
            };
        }

        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cost = vec![0.0; width];
        for &(j, c) in &lp.objective {
            cost[j] += sign * c;
        }

        let mut tab = Tableau {
            m,
            n,
            width,
            t,
            lo,
            hi,
            x,
            state,
            head: (n..n + m).collect(),
            cost,
            columns,
        };
        tab.refresh_basics();
        tab
    }

    #[inline]
    fn at(&self, r: usize, j: usize) -> f64 {
        self.t[r * self.width + j]
    }

    /// Recomputes basic values from the nonbasic ones using the original
    /// matrix and the basis inverse held in the logical columns.
    fn refresh_basics(&mut self) {
        let mut v = vec![0.0; self.m];
        for j in 0..self.n {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                for &(i, a) in &self.columns[j] {
                    v[i] -= a * self.x[j];
                }
            }
        }
        for i in 0..self.m {
            if self.state[self.n + i] != State::Basic {
                v[i] += self.x[self.n + i];
            }
        }
        for r in 0..self.m {
            let row = &self.t[r * self.width + self.n..(r + 1) * self.width];
            let s: f64 = row.iter().zip(&v).map(|(b, vi)| b * vi).sum();
            self.x[self.head[r]] = -s;
        }
    }

    fn violation(&self, j: usize) -> f64 {
        (self.lo[j] - self.x[j]).max(self.x[j] - self.hi[j]).max(0.0)
    }

    fn max_basic_violation(&self) -> f64 {
        self.head
            .iter()
            .map(|&j| self.violation(j))
            .fold(0.0, f64::max)
    }

    /// Basic cost per row for the current phase.
    fn basic_costs(&self, phase1: bool) -> Vec<f64> {
        self.head
            .iter()
            .map(|&j| {
                if phase1 {
                    if self.x[j] < self.lo[j] - PHASE1_TOL {
                        -1.0
                    } else if self.x[j] > self.hi[j] + PHASE1_TOL {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.cost[j]
                }
            })
            .collect()
    }

    fn reduced_costs(&self, phase1: bool) -> Vec<f64> {
        let mut d = if phase1 {
            vec![0.0; self.width]
        } else {
            self.cost.clone()
        };
        for (r, cb) in self.basic_costs(phase1).into_iter().enumerate() {
            if cb != 0.0 {
                let row = &self.t[r * self.width..(r + 1) * self.width];
                for (dj, tj) in d.iter_mut().zip(row) {
                    *dj -= cb * tj;
                }
            }
        }
        d
    }

    /// Entering column and direction (+1 increase, -1 decrease).
    fn price(&self, d: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.width {
            let dir = match self.state[j] {
                State::Basic => continue,
                _ if self.lo[j] == self.hi[j] => continue,
                State::AtLower if d[j] < -OPTIMALITY_TOL => 1.0,
                State::AtUpper if d[j] > OPTIMALITY_TOL => -1.0,
                State::Free if d[j].abs() > OPTIMALITY_TOL => -d[j].signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, s)| d[j].abs() > s) {
                best = Some((j, dir, d[j].abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Largest step along `dir` for basic row `r`, and the bound it stops at.
    fn row_limit(&self, r: usize, q: usize, dir: f64, phase1: bool) -> Option<(f64, f64)> {
        let tij = self.at(r, q);
        if tij.abs() <= PIVOT_TOL {
            return None;
        }
        let b = self.head[r];
        let rate = -tij * dir;
        let (xb, lo, hi) = (self.x[b], self.lo[b], self.hi[b]);
        if phase1 && xb < lo - PHASE1_TOL {
            return (rate > 0.0).then(|| ((lo - xb) / rate, lo));
        }
        if phase1 && xb > hi + PHASE1_TOL {
            return (rate < 0.0).then(|| ((xb - hi) / -rate, hi));
        }
        if rate < 0.0 && lo.is_finite() {
            Some((((xb - lo) / -rate).max(0.0), lo))
        } else if rate > 0.0 && hi.is_finite() {
            Some((((hi - xb) / rate).max(0.0), hi))
        } else {
            None
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let piv = self.t[r * w + q];
        let mut nz = Vec::new();
        for j in 0..w {
            let v = self.t[r * w + j] / piv;
            self.t[r * w + j] = v;
            if v != 0.0 {
                nz.push(j);
            }
        }
        self.t[r * w + q] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[q];
            if f != 0.0 {
                for &j in &nz {
                    row[j] -= f * prow[j];
                }
                row[q] = 0.0;
            }
        }
    }
}

/// Solves `lp` with its own variable bounds.
pub fn solve_lp(lp: &LinearProgram, iteration_limit: usize) -> LpSolution {
    let lower: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = lp.variables.iter().map(|v| v.upper).collect();
    solve_lp_with_bounds(lp, &lower, &upper, iteration_limit)
}

/// Solves `lp` with the variable bounds replaced by `lower`/`upper`.
///
/// The result is a pure function of the inputs: the pivot sequence is
/// deterministic.
pub fn solve_lp_with_bounds(
    lp: &LinearProgram,
    lower: &[f64],
    upper: &[f64],
    iteration_limit: usize,
) -> LpSolution {
    let n = lp.variables.len();
    assert_eq!(lower.len(), n);
    assert_eq!(upper.len(), n);
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return finish(lp, vec![0.0; n], LpStatus::Infeasible, 0);
    }

    let mut tab = Tableau::new(lp, lower, upper);
    let mut phase1 = tab.max_basic_violation() > PHASE1_TOL;
    let mut iterations = 0;
    let mut degenerate_run = 0;

    let status = loop {
        if iterations >= iteration_limit {
            break LpStatus::IterationLimit;
        }
        if iterations > 0 && iterations % REFRESH_EVERY == 0 {
            tab.refresh_basics();
        }
        let viol = tab.max_basic_violation();
        if !phase1 && viol > FEASIBILITY_TOL {
            phase1 = true;
        }
        if phase1 && viol <= PHASE1_TOL {
            phase1 = false;
        }

        let d = tab.reduced_costs(phase1);
        let bland = degenerate_run >= BLAND_AFTER;
        let Some((q, dir)) = tab.price(&d, bland) else {
            if phase1 {
                if viol > FEASIBILITY_TOL {
                    break LpStatus::Infeasible;
                }
                phase1 = false;
                // Re-price with the real objective; counts as no iteration.
                let d = tab.reduced_costs(false);
                if tab.price(&d, bland).is_none() {
                    break LpStatus::Optimal;
                }
                continue;
            }
            break LpStatus::Optimal;
        };

        // Ratio test: smallest step first, then a tie-break among near-ties.
        let mut t_min = f64::INFINITY;
        let mut limits = Vec::new();
        for r in 0..tab.m {
            if let Some((t, bound)) = tab.row_limit(r, q, dir, phase1) {
                t_min = t_min.min(t);
                limits.push((r, t, bound));
            }
        }
        let own_range = if dir > 0.0 {
            tab.hi[q] - tab.x[q]
        } else {
            tab.x[q] - tab.lo[q]
        };

        if own_range <= t_min {
            if !own_range.is_finite() {
                if phase1 {
                    // A phase-1 improving ray always meets a breakpoint; reaching
                    // here means the tableau has lost accuracy.
                    break LpStatus::IterationLimit;
                }
                break LpStatus::Unbounded;
            }
            let step = own_range;
            for r in 0..tab.m {
                let tij = tab.at(r, q);
                if tij != 0.0 {
                    tab.x[tab.head[r]] -= tij * dir * step;
                }
            }
            if dir > 0.0 {
                tab.x[q] = tab.hi[q];
                tab.state[q] = State::AtUpper;
            } else {
                tab.x[q] = tab.lo[q];
                tab.state[q] = State::AtLower;
            }
            degenerate_run = if step <= DEGENERATE_STEP { degenerate_run + 1 } else { 0 };
            iterations += 1;
            continue;
        }

        let tie = t_min + 1e-11 * t_min.abs().max(1.0);
        let (r, step, bound) = limits
            .iter()
            .filter(|(_, t, _)| *t <= tie)
            .copied()
            .reduce(|a, b| {
                let better = if bland {
                    tab.head[b.0] < tab.head[a.0]
                } else {
                    tab.at(b.0, q).abs() > tab.at(a.0, q).abs()
                };
                if better {
                    b
                } else {
                    a
                }
            })
            .expect("finite ratio has a row");

        for rr in 0..tab.m {
            let tij = tab.at(rr, q);
            if tij != 0.0 {
                tab.x[tab.head[rr]] -= tij * dir * step;
            }
        }
        tab.x[q] += dir * step;
        let leaving = tab.head[r];
        tab.x[leaving] = bound;
        tab.state[leaving] = if bound == tab.lo[leaving] {
            State::AtLower
        } else {
            State::AtUpper
        };
        tab.state[q] = State::Basic;
        tab.head[r] = q;
        tab.pivot(r, q);

        degenerate_run = if step <= DEGENERATE_STEP { degenerate_run + 1 } else { 0 };
        iterations += 1;
    };

    tab.refresh_basics();
    let mut primal: Vec<f64> = tab.x[..n].to_vec();
    for (j, v) in primal.iter_mut().enumerate() {
        *v = v.clamp(lower[j], upper[j]);
        if *v == 0.0 {
            *v = 0.0;
        }
    }
    finish(lp, primal, status, iterations)
}

fn finish(lp: &LinearProgram, primal: Vec<f64>, status: LpStatus, iterations: usize) -> LpSolution {
    let objective_value = match status {
        LpStatus::Unbounded => match lp.sense {
            Sense::Maximize => f64::INFINITY,
            Sense::Minimize => f64::NEG_INFINITY,
        },
        LpStatus::Infeasible => f64::NAN,
        _ => lp.objective_value(&primal),
    };
    LpSolution {
        status,
        objective_value,
        primal,
        iterations,
    }
}

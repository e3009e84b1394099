//! Solver-agnostic linear programs, a dense bounded-variable simplex, and a
//! fixed-format MPS writer.

mod mps;
mod simplex;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mps::{column_code, parse_column_code, row_code, write_mps};
pub use simplex::{solve_lp, solve_lp_with_bounds, DEFAULT_ITERATION_LIMIT};

/// Tolerance on constraint rows at an optimal solution.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Tolerance on reduced costs at an optimal solution.
pub const OPTIMALITY_TOL: f64 = 1e-7;
/// Pivot elements smaller than this are treated as zero.
pub const PIVOT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),
    #[error("constraint {constraint:?} references variable {index} out of range")]
    IndexOutOfRange { constraint: String, index: usize },
    #[error("NaN coefficient in {0:?}")]
    NaN(String),
    #[error("variable {0:?} has lower bound above upper bound")]
    EmptyDomain(String),
}

/// `optimize objective · x  s.t.  rows, lower <= x <= upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub sense: Sense,
    pub objective: Vec<(usize, f64)>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            variables: Vec::new(),
            constraints: Vec::new(),
            sense,
            objective: Vec::new(),
        }
    }

    /// Adds a variable and returns its index. Use infinities for open bounds.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, var: usize, coef: f64) {
        match self.objective.iter_mut().find(|(v, _)| *v == var) {
            Some(t) => t.1 = coef,
            None => self.objective.push((var, coef)),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let mut names = BTreeSet::new();
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return Err(LpError::DuplicateName(v.name.clone()));
            }
            if v.lower.is_nan() || v.upper.is_nan() {
                return Err(LpError::NaN(v.name.clone()));
            }
            if v.lower > v.upper {
                return Err(LpError::EmptyDomain(v.name.clone()));
            }
        }
        let n = self.variables.len();
        for c in &self.constraints {
            if c.rhs.is_nan() || c.terms.iter().any(|t| t.1.is_nan()) {
                return Err(LpError::NaN(c.name.clone()));
            }
            if let Some(&(index, _)) = c.terms.iter().find(|t| t.0 >= n) {
                return Err(LpError::IndexOutOfRange {
                    constraint: c.name.clone(),
                    index,
                });
            }
        }
        for &(index, coef) in &self.objective {
            if index >= n {
                return Err(LpError::IndexOutOfRange {
                    constraint: "objective".into(),
                    index,
                });
            }
            if coef.is_nan() {
                return Err(LpError::NaN("objective".into()));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    pub fn row_activity(&self, row: usize, x: &[f64]) -> f64 {
        self.constraints[row]
            .terms
            .iter()
            .map(|&(j, a)| a * x[j])
            .sum()
    }

    /// Largest violation of any constraint row by `x`.
    pub fn max_row_violation(&self, x: &[f64]) -> f64 {
        (0..self.constraints.len())
            .map(|i| {
                let c = &self.constraints[i];
                let act = self.row_activity(i, x);
                match c.relation {
                    Relation::Le => act - c.rhs,
                    Relation::Ge => c.rhs - act,
                    Relation::Eq => (act - c.rhs).abs(),
                }
                .max(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// Largest violation of any variable bound by `x`.
    pub fn max_bound_violation(&self, x: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lower - xv).max(xv - v.upper).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective of `primal` in the program's own sense. Meaningful only when
    /// `status` is `Optimal` (or the last basis for `IterationLimit`).
    pub objective_value: f64,
    pub primal: Vec<f64>,
    pub iterations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_malformed_programs() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, 1.0);
        lp.add_var("x", 0.0, 1.0);
        assert_eq!(lp.validate(), Err(LpError::DuplicateName("x".into())));

        let mut lp = LinearProgram::new(Sense::Maximize);
        lp.add_var("x", 0.0, 1.0);
        lp.add_constraint("c", vec![(3, 1.0)], Relation::Le, 1.0);
        assert!(matches!(lp.validate(), Err(LpError::IndexOutOfRange { .. })));

        let mut lp = LinearProgram::new(Sense::Maximize);
        lp.add_var("x", 0.0, 1.0);
        lp.add_constraint("c", vec![(x, f64::NAN)], Relation::Le, 1.0);
        assert_eq!(lp.validate(), Err(LpError::NaN("c".into())));
    }

    #[test]
    fn violation_measures() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", 0.0, 1.0);
        let y = lp.add_var("y", 0.0, f64::INFINITY);
        lp.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 2.0);
        assert_eq!(lp.max_row_violation(&[0.5, 1.0]), 0.5);
        assert_eq!(lp.max_bound_violation(&[1.5, 1.0]), 0.5);
        assert_eq!(lp.max_row_violation(&[1.0, 1.0]), 0.0);
    }
}

//! Mixed-integer programs with binary variables: an internal best-bound
//! branch-and-bound over the simplex engine, and an external backend that
//! drives a solver executable through MPS and a plain-text solution file.

mod bnb;
mod external;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{write_mps, LinearProgram, LpError};

pub use bnb::solve_mip;
pub use external::{parse_solution_file, solve_external, ExternalBackendConfig, ENV_COMMAND};

/// Binary values closer than this to 0 or 1 count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum MipError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("binary variable {0} is out of range")]
    BinaryOutOfRange(usize),
    #[error("binary variable {0:?} has bounds outside [0, 1]")]
    BinaryBounds(String),
    #[error("relative gap {0} is outside [0, 1)")]
    Gap(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedIntegerProgram {
    pub base: LinearProgram,
    pub binary_vars: BTreeSet<usize>,
}

impl MixedIntegerProgram {
    pub fn new(base: LinearProgram, binary_vars: BTreeSet<usize>) -> Self {
        MixedIntegerProgram { base, binary_vars }
    }

    pub fn validate(&self) -> Result<(), MipError> {
        self.base.validate()?;
        for &j in &self.binary_vars {
            let v = self
                .base
                .variables
                .get(j)
                .ok_or(MipError::BinaryOutOfRange(j))?;
            if v.lower < 0.0 || v.upper > 1.0 {
                return Err(MipError::BinaryBounds(v.name.clone()));
            }
        }
        Ok(())
    }

    pub fn num_binaries(&self) -> usize {
        self.binary_vars.len()
    }

    pub fn to_mps(&self) -> String {
        write_mps(&self.base, &self.binary_vars)
    }

    /// Largest distance of any binary in `x` from the nearest integer.
    pub fn max_fractionality(&self, x: &[f64]) -> f64 {
        self.binary_vars
            .iter()
            .map(|&j| (x[j] - x[j].round()).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    /// Wall-clock budget. Zero is allowed and stops before the first node.
    pub time_limit: Duration,
    pub rel_gap: f64,
    /// Values for the binaries, tried first as an incumbent.
    pub warm_start: Option<BTreeMap<usize, f64>>,
}

impl SolveOptions {
    pub fn new(time_limit: Duration, rel_gap: f64) -> Result<Self, MipError> {
        if !(0.0..1.0).contains(&rel_gap) {
            return Err(MipError::Gap(rel_gap));
        }
        Ok(SolveOptions {
            time_limit,
            rel_gap,
            warm_start: None,
        })
    }

    pub fn with_warm_start(mut self, values: BTreeMap<usize, f64>) -> Self {
        self.warm_start = Some(values);
        self
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit: Duration::from_secs(60),
            rel_gap: 0.01,
            warm_start: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MipStatus {
    OptimalWithinGap,
    FeasibleTimeLimit,
    Infeasible,
    Failure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MipSolution {
    pub status: MipStatus,
    /// Incumbent objective in the program's own sense.
    pub objective: Option<f64>,
    pub best_bound: f64,
    pub gap: Option<f64>,
    /// Full primal vector of the incumbent.
    pub values: Option<Vec<f64>>,
    pub elapsed: Duration,
    pub nodes: usize,
    pub hit_time_limit: bool,
    /// `(best bound, incumbent)` after every node solve, in the program's sense.
    pub trace: Vec<(f64, Option<f64>)>,
}

impl MipSolution {
    pub(crate) fn failed(elapsed: Duration, hit_time_limit: bool) -> Self {
        MipSolution {
            status: MipStatus::Failure,
            objective: None,
            best_bound: f64::NAN,
            gap: None,
            values: None,
            elapsed,
            nodes: 0,
            hit_time_limit,
            trace: Vec::new(),
        }
    }

    pub fn has_incumbent(&self) -> bool {
        self.values.is_some()
    }

    /// Values of the binaries in the incumbent, keyed by variable index.
    pub fn binary_assignment(&self, mip: &MixedIntegerProgram) -> Option<BTreeMap<usize, f64>> {
        let x = self.values.as_ref()?;
        Some(mip.binary_vars.iter().map(|&j| (j, x[j])).collect())
    }
}

/// `|bound - incumbent| / max(|incumbent|, 1e-10)`.
pub fn relative_gap(bound: f64, incumbent: f64) -> f64 {
    (bound - incumbent).abs() / incumbent.abs().max(1e-10)
}

/// Where MILPs get solved.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum MipBackend {
    #[default]
    Internal,
    External(ExternalBackendConfig),
}

impl MipBackend {
    pub fn solve(&self, mip: &MixedIntegerProgram, opts: &SolveOptions) -> MipSolution {
        match self {
            MipBackend::Internal => solve_mip(mip, opts),
            MipBackend::External(cfg) => solve_external(mip, opts, cfg),
        }
    }
}

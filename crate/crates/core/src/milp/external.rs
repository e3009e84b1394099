//! Solving through an external executable.
//!
//! The program is written as fixed-format MPS and the command template is run
//! through `sh -c` after substituting `{mps}`, `{timelimit}` (seconds),
//! `{gap}` and `{solfile}`. The solver is expected to write `{solfile}`:
//!
//! ```text
//! # comments and blank lines are ignored
//! objective 12.5
//! bound 12.6            (optional; defaults to the objective)
//! status infeasible     (optional; one of optimal, feasible, infeasible)
//! X0000001 1
//! X0000003 0.25
//! ```
//!
//! Variables are named by their MPS column code or by their own name. Any
//! variable not listed is zero.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::{relative_gap, MipSolution, MipStatus, MixedIntegerProgram, SolveOptions};
use crate::lp::parse_column_code;

/// Environment variable that overrides the configured command template.
pub const ENV_COMMAND: &str = "GRIDRESTORE_EXTERNAL_CMD";

#[derive(Clone, Debug, PartialEq)]
pub struct ExternalBackendConfig {
    pub command: String,
    /// Extra wall time granted to the process beyond the solve time limit.
    pub grace: Duration,
    /// Keep the MPS and solution files in this directory instead of a temp dir.
    pub keep_dir: Option<PathBuf>,
}

impl ExternalBackendConfig {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalBackendConfig {
            command: command.into(),
            grace: Duration::from_secs(5),
            keep_dir: None,
        }
    }

    /// Config from [`ENV_COMMAND`], if set and nonempty.
    pub fn from_env() -> Option<Self> {
        std::env::var(ENV_COMMAND)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .map(Self::new)
    }
}

#[derive(Debug, PartialEq)]
pub struct SolutionFile {
    pub objective: f64,
    pub bound: Option<f64>,
    pub infeasible: bool,
    pub values: Vec<f64>,
}

/// Parses solution-file text for a program with the given variable names.
pub fn parse_solution_file(text: &str, names: &[String]) -> Result<SolutionFile, String> {
    let by_name: HashMap<&str, usize> = names.iter().enumerate().map(|(j, n)| (n.as_str(), j)).collect();
    let mut objective = None;
    let mut bound = None;
    let mut infeasible = false;
    let mut values = vec![0.0; names.len()];
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let value = parts
            .next()
            .ok_or_else(|| format!("line {}: missing value", no + 1))?;
        if parts.next().is_some() {
            return Err(format!("line {}: trailing fields", no + 1));
        }
        if key.eq_ignore_ascii_case("status") {
            match value.to_ascii_lowercase().as_str() {
                "infeasible" => infeasible = true,
                "optimal" | "feasible" => {}
                other => return Err(format!("line {}: unknown status {other:?}", no + 1)),
            }
            continue;
        }
        let v: f64 = value
            .parse()
            .map_err(|_| format!("line {}: bad number {value:?}", no + 1))?;
        if !v.is_finite() {
            return Err(format!("line {}: non-finite value", no + 1));
        }
        if key.eq_ignore_ascii_case("objective") {
            objective = Some(v);
        } else if key.eq_ignore_ascii_case("bound") {
            bound = Some(v);
        } else {
            let j = parse_column_code(key)
                .filter(|&j| j < names.len())
                .or_else(|| by_name.get(key).copied())
                .ok_or_else(|| format!("line {}: unknown variable {key:?}", no + 1))?;
            values[j] = v;
        }
    }
    if infeasible {
        return Ok(SolutionFile {
            objective: f64::NAN,
            bound: None,
            infeasible,
            values,
        });
    }
    Ok(SolutionFile {
        objective: objective.ok_or("missing objective line")?,
        bound,
        infeasible,
        values,
    })
}

fn run(mip: &MixedIntegerProgram, opts: &SolveOptions, cfg: &ExternalBackendConfig) -> Result<SolutionFile, String> {
    let temp;
    let dir = match &cfg.keep_dir {
        Some(d) => {
            fs::create_dir_all(d).map_err(|e| e.to_string())?;
            d.clone()
        }
        None => {
            temp = tempfile::tempdir().map_err(|e| e.to_string())?;
            temp.path().to_path_buf()
        }
    };
    let mps = dir.join("model.mps");
    let sol = dir.join("model.sol");
    let _ = fs::remove_file(&sol);
    fs::write(&mps, mip.to_mps()).map_err(|e| e.to_string())?;
    let command = cfg
        .command
        .replace("{mps}", &mps.display().to_string())
        .replace("{solfile}", &sol.display().to_string())
        .replace("{timelimit}", &format!("{}", opts.time_limit.as_secs_f64()))
        .replace("{gap}", &format!("{}", opts.rel_gap));

    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| format!("spawn failed: {e}"))?;
    let deadline = Instant::now() + opts.time_limit + cfg.grace;
    let status = loop {
        match child.try_wait().map_err(|e| e.to_string())? {
            Some(status) => break status,
            None if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err("external solver timed out".into());
            }
            None => thread::sleep(Duration::from_millis(5)),
        }
    };
    if !status.success() {
        return Err(format!("external solver exited with {status}"));
    }
    let text = fs::read_to_string(&sol).map_err(|e| format!("reading solution: {e}"))?;
    let names: Vec<String> = mip.base.variables.iter().map(|v| v.name.clone()).collect();
    parse_solution_file(&text, &names)
}

/// Solves `mip` with an external executable. Every failure mode maps to
/// [`MipStatus::Failure`].
pub fn solve_external(mip: &MixedIntegerProgram, opts: &SolveOptions, cfg: &ExternalBackendConfig) -> MipSolution {
    let start = Instant::now();
    let file = match run(mip, opts, cfg) {
        Ok(f) => f,
        Err(e) => {
            log::warn!("external backend: {e}");
            return MipSolution::failed(start.elapsed(), false);
        }
    };
    let elapsed = start.elapsed();
    if file.infeasible {
        let mut s = MipSolution::failed(elapsed, false);
        s.status = MipStatus::Infeasible;
        return s;
    }
    let bound = file.bound.unwrap_or(file.objective);
    let gap = relative_gap(bound, file.objective);
    MipSolution {
        status: if gap <= opts.rel_gap + 1e-12 {
            MipStatus::OptimalWithinGap
        } else {
            MipStatus::FeasibleTimeLimit
        },
        objective: Some(file.objective),
        best_bound: bound,
        gap: Some(gap),
        values: Some(file.values),
        elapsed,
        nodes: 0,
        hit_time_limit: false,
        trace: Vec::new(),
    }
}

//! Run configurations and the `solve`, `compare` and `sweep` commands.
//!
//! Every command is deterministic given its configuration when the internal
//! backend is used and no time limit triggers. Wall-clock times are kept out
//! of `summary.json` and written to `timing.json` instead.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{AnalysisError, RestorationReport};
use crate::heuristics::{brute_force_optimal, rad, rrr, solve_rop, util_order, AlgoBudget, HeuristicError, RadConfig};
use crate::milp::{ExternalBackendConfig, MipBackend, MipStatus};
use crate::models::ModelError;
use crate::network::{
    build_schedule, parse_case, random_damage, DamageScenario, LineId, Network, PeriodSchedule, RestorationPlan,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Util,
    Rrr,
    Rad,
    Rop,
    Oracle,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Util => "util",
            Algorithm::Rrr => "rrr",
            Algorithm::Rad => "rad",
            Algorithm::Rop => "rop",
            Algorithm::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DamageSpec {
    Fraction(f64),
    Lines(Vec<LineId>),
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("model is infeasible: {0}")]
    Infeasible(String),
    #[error("solver produced no plan: {0}")]
    SolverFailure(String),
}

impl BenchError {
    /// 1 for usage, parse and I/O errors, 2 for infeasible models, 3 for solver
    /// failures without a plan.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) | BenchError::Parse { .. } | BenchError::Io(_) => 1,
            BenchError::Infeasible(_) => 2,
            BenchError::SolverFailure(_) => 3,
        }
    }
}

impl From<ModelError> for BenchError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Lp(crate::lp::LpStatus::Infeasible) => BenchError::Infeasible(e.to_string()),
            ModelError::Lp(_) | ModelError::NoIncumbent | ModelError::NotMonotone { .. } => {
                BenchError::SolverFailure(e.to_string())
            }
            other => BenchError::Usage(other.to_string()),
        }
    }
}

impl From<AnalysisError> for BenchError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Model(m) => m.into(),
            AnalysisError::Io(io) => BenchError::Io(io),
            other => BenchError::Usage(other.to_string()),
        }
    }
}

impl From<HeuristicError> for BenchError {
    fn from(e: HeuristicError) -> Self {
        match e {
            HeuristicError::Model(m) => m.into(),
            other => BenchError::Usage(other.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub case: PathBuf,
    pub damage: DamageSpec,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub time_limit: Duration,
    pub rel_gap: f64,
    /// Period count; `None` means one period per damaged line.
    pub n_periods: Option<usize>,
    pub hours_per_period: f64,
    pub out_dir: Option<PathBuf>,
    pub backend: MipBackend,
    /// Run RRR halves and RAD blocks on the rayon pool.
    pub parallel: bool,
    pub rad: RadConfig,
}

impl RunConfig {
    pub fn new(case: impl Into<PathBuf>, damage: DamageSpec, algorithm: Algorithm) -> Self {
        RunConfig {
            case: case.into(),
            damage,
            seed: 0,
            algorithm,
            time_limit: Duration::from_secs(60),
            rel_gap: 0.01,
            n_periods: None,
            hours_per_period: 1.0,
            out_dir: None,
            backend: MipBackend::Internal,
            parallel: false,
            rad: RadConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if let DamageSpec::Fraction(f) = self.damage {
            if !(0.0..=1.0).contains(&f) {
                return Err(BenchError::Usage(format!("damage fraction {f} is outside [0, 1]")));
            }
        }
        if !(0.0..1.0).contains(&self.rel_gap) {
            return Err(BenchError::Usage(format!("gap {} is outside [0, 1)", self.rel_gap)));
        }
        if self.n_periods == Some(0) {
            return Err(BenchError::Usage("need at least one period".into()));
        }
        if !(self.hours_per_period > 0.0 && self.hours_per_period.is_finite()) {
            return Err(BenchError::Usage("period duration must be positive".into()));
        }
        if self.algorithm == Algorithm::Rad {
            self.rad.validate().map_err(BenchError::Usage)?;
        }
        Ok(())
    }

    pub fn budget(&self) -> AlgoBudget {
        AlgoBudget {
            time_limit: self.time_limit,
            rel_gap: self.rel_gap,
            seed: self.seed,
            backend: self.backend.clone(),
            parallel: self.parallel,
        }
    }
}

/// External backend from a command template. [`crate::milp::ENV_COMMAND`],
/// when set, replaces the template.
pub fn external_backend(template: Option<&str>) -> Result<MipBackend, BenchError> {
    ExternalBackendConfig::from_env()
        .or_else(|| template.map(ExternalBackendConfig::new))
        .map(MipBackend::External)
        .ok_or_else(|| BenchError::Usage("external backend needs a command template".into()))
}

/// Reads a MATPOWER `.m` case or a JSON network.
pub fn load_case(path: &Path) -> Result<Network, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        Network::from_json(&text).map_err(|e| e.to_string())
    } else {
        parse_case(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|message| BenchError::Parse {
        path: path.display().to_string(),
        message,
    })
}

pub fn make_damage(network: &Network, spec: &DamageSpec, seed: u64) -> Result<DamageScenario, BenchError> {
    match spec {
        DamageSpec::Fraction(f) => random_damage(network, *f, seed),
        DamageSpec::Lines(ids) => DamageScenario::from_lines(network, ids),
    }
    .map_err(|e| BenchError::Usage(e.to_string()))
}

/// Spreads a restoration order over the schedule: period `k` restores the
/// lines between budgets `R_{k-1}` and `R_k`.
pub fn plan_from_order(order: &[LineId], schedule: &PeriodSchedule) -> RestorationPlan {
    let mut prev = 0;
    let periods = schedule
        .repair_budget
        .iter()
        .map(|&r| {
            let r = r.min(order.len());
            let p = order[prev..r].to_vec();
            prev = r;
            p
        })
        .collect();
    RestorationPlan::new(periods)
}

/// Outcome of running one algorithm on one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub report: RestorationReport,
    pub gap: Option<f64>,
    pub mip_status: Option<MipStatus>,
}

/// Runs the configured algorithm on a loaded network and damage set. The
/// reported wall time covers model builds and solves, not case parsing.
pub fn run_algorithm(network: &Network, damage: &DamageScenario, cfg: &RunConfig) -> Result<RunResult, BenchError> {
    let n = cfg.n_periods.unwrap_or(damage.len().max(1));
    let schedule = build_schedule(damage.len(), n, cfg.hours_per_period);
    let budget = cfg.budget();
    let start = Instant::now();
    let mut gap = None;
    let mut mip_status = None;
    let plan = match cfg.algorithm {
        Algorithm::Util => plan_from_order(&util_order(network, damage).order(), &schedule),
        Algorithm::Rrr => plan_from_order(&rrr(network, damage, &budget).order(), &schedule),
        Algorithm::Rad => {
            let init = util_order(network, damage);
            plan_from_order(&rad(network, damage, &budget, &cfg.rad, &init).order(), &schedule)
        }
        Algorithm::Rop => {
            let warm = plan_from_order(&util_order(network, damage).order(), &schedule);
            let (plan, sol) = solve_rop(network, damage, &schedule, &budget, Some(&warm))?;
            mip_status = Some(sol.status);
            gap = sol.gap;
            match (plan, sol.status) {
                (Some(p), _) => p,
                (None, MipStatus::Infeasible) => return Err(BenchError::Infeasible("restoration ordering MILP".into())),
                (None, status) => return Err(BenchError::SolverFailure(format!("{status:?}"))),
            }
        }
        Algorithm::Oracle => brute_force_optimal(network, damage, &schedule)?.0,
    };
    let mut report = RestorationReport::build(network, damage, &plan, &schedule, cfg.algorithm.name(), 0.0)?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(RunResult {
        report,
        gap,
        mip_status,
    })
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: String,
    pub case: String,
    pub seed: u64,
    pub damaged_lines: Vec<LineId>,
    pub n_periods: usize,
    pub total_energy: f64,
    pub gap: Option<f64>,
    pub mip_status: Option<MipStatus>,
    pub plan: Vec<Vec<LineId>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub summary: Summary,
    pub result: RunResult,
    /// Files written, if an output directory was configured.
    pub files: Vec<PathBuf>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| BenchError::Io(e.error))?;
    Ok(())
}

/// Parses the case, applies damage, runs the algorithm, and writes
/// `report.csv`, `summary.json` and `timing.json` to the output directory.
pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveOutcome, BenchError> {
    cfg.validate()?;
    let network = load_case(&cfg.case)?;
    let damage = make_damage(&network, &cfg.damage, cfg.seed)?;
    let result = run_algorithm(&network, &damage, cfg)?;
    let summary = Summary {
        algorithm: cfg.algorithm.name().to_string(),
        case: cfg
            .case
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        seed: cfg.seed,
        damaged_lines: damage.damaged_lines.clone(),
        n_periods: result.report.plan.n_periods(),
        total_energy: result.report.total_energy,
        gap: result.gap,
        mip_status: result.mip_status,
        plan: result.report.plan.periods.clone(),
    };
    let mut files = Vec::new();
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir)?;
        let mut csv = Vec::new();
        result.report.write_csv(&mut csv)?;
        let report_path = dir.join("report.csv");
        write_atomic(&report_path, &csv)?;
        let summary_path = dir.join("summary.json");
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        write_atomic(&summary_path, format!("{json}\n").as_bytes())?;
        let timing_path = dir.join("timing.json");
        let timing = serde_json::json!({ "wall_time_s": result.report.wall_time_s });
        write_atomic(&timing_path, format!("{timing}\n").as_bytes())?;
        files = vec![report_path, summary_path, timing_path];
    }
    Ok(SolveOutcome { summary, result, files })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub algorithm: String,
    pub total_energy: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub gap: Option<f64>,
    pub error: Option<String>,
    /// `best`, `within_1pct` or empty.
    pub flag: String,
}

/// Runs each algorithm on the same scenario and flags the best energy and
/// energies within 1% of it. Failed runs become rows with an error.
pub fn cmd_compare(base: &RunConfig, algorithms: &[Algorithm]) -> Result<(Vec<CompareRow>, String), BenchError> {
    if algorithms.len() < 2 {
        return Err(BenchError::Usage("compare needs at least two algorithms".into()));
    }
    base.validate()?;
    let network = load_case(&base.case)?;
    let damage = make_damage(&network, &base.damage, base.seed)?;
    let mut rows: Vec<CompareRow> = algorithms
        .iter()
        .map(|&algorithm| {
            let cfg = RunConfig {
                algorithm,
                ..base.clone()
            };
            match run_algorithm(&network, &damage, &cfg) {
                Ok(r) => CompareRow {
                    algorithm: algorithm.name().into(),
                    total_energy: Some(r.report.total_energy),
                    wall_time_s: Some(r.report.wall_time_s),
                    gap: r.gap,
                    error: None,
                    flag: String::new(),
                },
                Err(e) => CompareRow {
                    algorithm: algorithm.name().into(),
                    total_energy: None,
                    wall_time_s: None,
                    gap: None,
                    error: Some(e.to_string()),
                    flag: String::new(),
                },
            }
        })
        .collect();
    let best = rows
        .iter()
        .filter_map(|r| r.total_energy)
        .fold(f64::NEG_INFINITY, f64::max);
    for r in &mut rows {
        if let Some(e) = r.total_energy {
            if e == best {
                r.flag = "best".into();
            } else if e >= best - 0.01 * best.abs() {
                r.flag = "within_1pct".into();
            }
        }
    }

    let mut text = String::new();
    let _ = writeln!(text, "{:<8} {:>16} {:>10} {:>10}  flag", "algo", "energy_pu_h", "time_s", "gap");
    for r in &rows {
        let energy = r.total_energy.map_or("-".into(), |e| format!("{e:.6}"));
        let time = r.wall_time_s.map_or("-".into(), |t| format!("{t:.3}"));
        let gap = r.gap.map_or("-".into(), |g| format!("{g:.4}"));
        let flag = match (&r.error, r.flag.as_str()) {
            (Some(e), _) => format!("FAILED: {e}"),
            (None, "best") => "*".into(),
            (None, "within_1pct") => "~".into(),
            _ => String::new(),
        };
        let _ = writeln!(text, "{:<8} {:>16} {:>10} {:>10}  {}", r.algorithm, energy, time, gap, flag);
    }

    if let Some(dir) = &base.out_dir {
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["algorithm", "total_energy", "wall_time_s", "gap", "flag", "error"])
            .map_err(|e| BenchError::Usage(e.to_string()))?;
        for r in &rows {
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            w.write_record([
                r.algorithm.clone(),
                opt(r.total_energy),
                opt(r.wall_time_s),
                opt(r.gap),
                r.flag.clone(),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(|e| BenchError::Usage(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Usage(e.to_string()))?;
        write_atomic(&dir.join("compare.csv"), &bytes)?;
        write_atomic(&dir.join("compare.txt"), text.as_bytes())?;
    }
    Ok((rows, text))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub case: PathBuf,
    pub fractions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub time_limit: Duration,
    pub rel_gap: f64,
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses one per logical core.
    pub workers: Option<usize>,
    pub backend: MipBackend,
    pub rad: RadConfig,
}

/// One sweep cell; also the schema of the cached per-cell files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub case: String,
    pub fraction: f64,
    pub seed: u64,
    pub algorithm: String,
    pub damaged: usize,
    pub energy: Option<f64>,
    pub time_s: Option<f64>,
    pub gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub computed: usize,
    pub cached: usize,
    pub csv_path: PathBuf,
}

fn cell_path(dir: &Path, fraction: f64, seed: u64, algorithm: Algorithm) -> PathBuf {
    dir.join("cells")
        .join(format!("{}_f{}_s{}.json", algorithm.name(), fraction, seed))
}

/// Full factorial over fractions, seeds and algorithms. Finished cells are
/// cached as JSON under `out_dir/cells/` and reused on later runs.
pub fn cmd_sweep(cfg: &SweepConfig) -> Result<SweepOutcome, BenchError> {
    if cfg.fractions.is_empty() || cfg.seeds.is_empty() || cfg.algorithms.is_empty() {
        return Err(BenchError::Usage("sweep needs fractions, seeds and algorithms".into()));
    }
    let network = load_case(&cfg.case)?;
    let case_name = cfg
        .case
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    fs::create_dir_all(cfg.out_dir.join("cells"))?;

    let mut cells = Vec::new();
    for &f in &cfg.fractions {
        for &s in &cfg.seeds {
            for &a in &cfg.algorithms {
                cells.push((f, s, a));
            }
        }
    }

    let run_cell = |&(fraction, seed, algorithm): &(f64, u64, Algorithm)| -> Result<(SweepRow, bool), BenchError> {
        let path = cell_path(&cfg.out_dir, fraction, seed, algorithm);
        if let Some(row) = fs::read_to_string(&path)
            .ok()
            .and_then(|t| serde_json::from_str::<SweepRow>(&t).ok())
        {
            return Ok((row, false));
        }
        let mut run = RunConfig::new(&cfg.case, DamageSpec::Fraction(fraction), algorithm);
        run.seed = seed;
        run.time_limit = cfg.time_limit;
        run.rel_gap = cfg.rel_gap;
        run.backend = cfg.backend.clone();
        run.rad = cfg.rad.clone();
        let outcome = make_damage(&network, &run.damage, seed)
            .and_then(|d| run_algorithm(&network, &d, &run).map(|r| (d.len(), r)));
        let row = match outcome {
            Ok((damaged, r)) => SweepRow {
                case: case_name.clone(),
                fraction,
                seed,
                algorithm: algorithm.name().into(),
                damaged,
                energy: Some(r.report.total_energy),
                time_s: Some(r.report.wall_time_s),
                gap: r.gap,
                error: None,
            },
            Err(e) => SweepRow {
                case: case_name.clone(),
                fraction,
                seed,
                algorithm: algorithm.name().into(),
                damaged: make_damage(&network, &run.damage, seed).map_or(0, |d| d.len()),
                energy: None,
                time_s: None,
                gap: None,
                error: Some(e.to_string()),
            },
        };
        let json = serde_json::to_string_pretty(&row).expect("row serializes");
        write_atomic(&path, json.as_bytes())?;
        Ok((row, true))
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| BenchError::Usage(e.to_string()))?;
    let results: Vec<Result<(SweepRow, bool), BenchError>> = pool.install(|| {
        use rayon::prelude::*;
        cells.par_iter().map(run_cell).collect()
    });

    let mut rows = Vec::with_capacity(results.len());
    let mut computed = 0;
    for r in results {
        let (row, fresh) = r?;
        computed += fresh as usize;
        rows.push(row);
    }
    let cached = rows.len() - computed;

    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| BenchError::Usage(e.to_string());
    w.write_record(["case", "fraction", "seed", "algorithm", "damaged", "energy", "time", "gap", "error"])
        .map_err(err)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in &rows {
        w.write_record([
            r.case.clone(),
            r.fraction.to_string(),
            r.seed.to_string(),
            r.algorithm.clone(),
            r.damaged.to_string(),
            opt(r.energy),
            opt(r.time_s),
            opt(r.gap),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Usage(e.to_string()))?;
    let csv_path = cfg.out_dir.join("sweep.csv");
    write_atomic(&csv_path, &bytes)?;
    Ok(SweepOutcome {
        rows,
        computed,
        cached,
        csv_path,
    })
}

/// Damaged-line counts per fraction, as the sweep would draw them.
pub fn damage_counts(network: &Network, fractions: &[f64]) -> BTreeMap<String, usize> {
    fractions
        .iter()
        .map(|&f| {
            let n = random_damage(network, f, 0).map_or(0, |d| d.len());
            (f.to_string(), n)
        })
        .collect()
}

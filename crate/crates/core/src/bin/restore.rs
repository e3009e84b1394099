use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridrestore::bench::{
    cmd_compare, cmd_solve, cmd_sweep, external_backend, Algorithm, BenchError, DamageSpec, RunConfig, SweepConfig,
};
use gridrestore::heuristics::RadConfig;
use gridrestore::milp::MipBackend;
use gridrestore::network::LineId;

#[derive(Parser)]
#[command(name = "restore", about = "Order line repairs in a damaged transmission grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm and write report.csv, summary.json and timing.json.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "rrr")]
        algo: Algorithm,
    },
    /// Run several algorithms on one scenario and print a table.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, value_delimiter = ',', required = true)]
        algos: Vec<Algorithm>,
    },
    /// Full factorial over damage fractions, seeds and algorithms.
    Sweep {
        #[arg(long)]
        case: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        fractions: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long, value_enum, value_delimiter = ',', required = true)]
        algos: Vec<Algorithm>,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 0.01)]
        gap: f64,
        #[arg(long, default_value = "sweep-out")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        backend: BackendArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Internal,
    External,
}

#[derive(Args)]
struct BackendArgs {
    #[arg(long, value_enum, default_value = "internal")]
    backend: Backend,
    /// Command template with {mps}, {timelimit}, {gap} and {solfile}.
    #[arg(long)]
    external_cmd: Option<String>,
}

impl BackendArgs {
    fn resolve(&self) -> Result<MipBackend, BenchError> {
        match self.backend {
            Backend::Internal => Ok(MipBackend::Internal),
            Backend::External => external_backend(self.external_cmd.as_deref()),
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    case: PathBuf,
    #[arg(long, conflicts_with = "damage_lines")]
    damage_fraction: Option<f64>,
    /// Comma-separated line ids (1-based branch rows).
    #[arg(long, value_delimiter = ',')]
    damage_lines: Option<Vec<u32>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0.01)]
    gap: f64,
    /// Defaults to one period per damaged line.
    #[arg(long)]
    periods: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    hours: f64,
    #[arg(long, default_value = "restore-out")]
    out: PathBuf,
    #[arg(long)]
    parallel: bool,
    #[arg(long, default_value_t = 2)]
    rad_min: usize,
    #[arg(long, default_value_t = 5)]
    rad_max: usize,
    #[arg(long, default_value_t = 100)]
    rad_stall: usize,
    #[command(flatten)]
    backend: BackendArgs,
}

fn seconds(s: f64) -> Result<Duration, BenchError> {
    Duration::try_from_secs_f64(s).map_err(|_| BenchError::Usage(format!("bad time limit {s}")))
}

impl Common {
    fn config(&self, algorithm: Algorithm) -> Result<RunConfig, BenchError> {
        let damage = match (&self.damage_fraction, &self.damage_lines) {
            (Some(f), None) => DamageSpec::Fraction(*f),
            (None, Some(ids)) => DamageSpec::Lines(ids.iter().map(|&i| LineId(i)).collect()),
            _ => {
                return Err(BenchError::Usage(
                    "give exactly one of --damage-fraction and --damage-lines".into(),
                ))
            }
        };
        let mut cfg = RunConfig::new(&self.case, damage, algorithm);
        cfg.seed = self.seed;
        cfg.time_limit = seconds(self.time_limit)?;
        cfg.rel_gap = self.gap;
        cfg.n_periods = self.periods;
        cfg.hours_per_period = self.hours;
        cfg.out_dir = Some(self.out.clone());
        cfg.parallel = self.parallel;
        cfg.backend = self.backend.resolve()?;
        cfg.rad = RadConfig {
            min_partition: self.rad_min,
            max_partition: self.rad_max,
            stall_limit: self.rad_stall,
            ..RadConfig::default()
        };
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Solve { common, algo } => {
            let out = cmd_solve(&common.config(algo)?)?;
            println!(
                "{} energy={} periods={} wall_time_s={:.3}{}",
                out.summary.algorithm,
                out.summary.total_energy,
                out.summary.n_periods,
                out.result.report.wall_time_s,
                out.summary.gap.map_or(String::new(), |g| format!(" gap={g:.4}")),
            );
            for f in out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Compare { common, algos } => {
            let (_, table) = cmd_compare(&common.config(algos[0])?, &algos)?;
            print!("{table}");
        }
        Command::Sweep {
            case,
            fractions,
            seeds,
            algos,
            time_limit,
            gap,
            out,
            workers,
            backend,
        } => {
            let cfg = SweepConfig {
                case,
                fractions,
                seeds,
                algorithms: algos,
                time_limit: seconds(time_limit)?,
                rel_gap: gap,
                out_dir: out,
                workers,
                backend: backend.resolve()?,
                rad: RadConfig::default(),
            };
            let o = cmd_sweep(&cfg)?;
            println!(
                "{} cells ({} computed, {} cached) -> {}",
                o.rows.len(),
                o.computed,
                o.cached,
                o.csv_path.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

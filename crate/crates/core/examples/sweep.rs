//! Small factorial sweep over damage fractions and seeds. Cells are cached, so
//! a second run only rewrites sweep.csv.

use std::path::PathBuf;
use std::time::Duration;

use gridrestore::bench::{cmd_sweep, Algorithm, SweepConfig};
use gridrestore::heuristics::RadConfig;
use gridrestore::milp::MipBackend;

fn main() {
    let out = std::env::temp_dir().join("gridrestore-sweep-example");
    let cfg = SweepConfig {
        case: PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/case24_synth.m"),
        fractions: vec![0.1, 0.2, 0.3],
        seeds: vec![1, 2],
        algorithms: vec![Algorithm::Util, Algorithm::Rrr],
        time_limit: Duration::from_secs(20),
        rel_gap: 0.01,
        out_dir: out,
        workers: None,
        backend: MipBackend::Internal,
        rad: RadConfig::default(),
    };
    let o = cmd_sweep(&cfg).unwrap();
    println!("{} computed, {} cached -> {}", o.computed, o.cached, o.csv_path.display());
    for r in &o.rows {
        println!("{:>4} {:>2} {:<5} {:>3} damaged  energy {:?}", r.fraction, r.seed, r.algorithm, r.damaged, r.energy);
    }
}

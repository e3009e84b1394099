//! Run every heuristic on one damage scenario of the bundled 24-bus case and
//! print the comparison table.

use std::path::PathBuf;
use std::time::Duration;

use gridrestore::bench::{cmd_compare, Algorithm, DamageSpec, RunConfig};

fn main() {
    let case = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/case24_synth.m");
    let mut cfg = RunConfig::new(case, DamageSpec::Fraction(0.25), Algorithm::Util);
    cfg.seed = 5;
    cfg.time_limit = Duration::from_secs(10);
    cfg.parallel = true;
    let (_, table) = cmd_compare(&cfg, &[Algorithm::Util, Algorithm::Rrr, Algorithm::Rad, Algorithm::Rop]).unwrap();
    print!("{table}");
}

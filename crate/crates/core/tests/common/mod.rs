#![allow(dead_code)]

use std::io::Write;

use gridrestore::network::{random_damage, DamageScenario, Network};
use gridrestore::synthetic::{random_network, SyntheticSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small random grid (4-8 buses, 5-10 lines) with 3-5 damaged lines.
pub fn small_instance(i: u64) -> (Network, DamageScenario) {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
    let buses = rng.random_range(4..=8);
    let lines = rng.random_range(5usize.max(buses - 1)..=10);
    let damaged = rng.random_range(3..=5);
    instance(buses, lines, damaged, i)
}

/// Random grid with exactly `damaged` damaged lines.
pub fn instance(buses: usize, lines: usize, damaged: usize, seed: u64) -> (Network, DamageScenario) {
    let net = random_network(&SyntheticSpec::new(buses, lines), seed);
    let damage = random_damage(&net, damaged as f64 / lines as f64, seed).unwrap();
    assert_eq!(damage.len(), damaged);
    (net, damage)
}

/// Writes straight to stderr so the line shows even when test output is captured.
pub fn report(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

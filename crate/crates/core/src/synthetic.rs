//! Seeded generators for small test grids, plus the fixed 3-bus reference grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::network::{Bus, BusId, Generator, Line, LineId, Load, Network, DEFAULT_ANGLE_DIFF_MAX};

/// Shape of a random grid. The first `n_buses - 1` lines form a random
/// spanning tree, so every generated grid is connected when undamaged.
#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub n_buses: usize,
    pub n_lines: usize,
    /// Share of buses that carry a load.
    pub load_share: f64,
    /// Share of buses that carry a generator (at least one is always placed).
    pub gen_share: f64,
    /// Total generation capacity as a multiple of total demand.
    pub gen_margin: f64,
    pub thermal_range: (f64, f64),
    pub reactance_range: (f64, f64),
    pub demand_range: (f64, f64),
}

impl SyntheticSpec {
    pub fn new(n_buses: usize, n_lines: usize) -> Self {
        SyntheticSpec {
            n_buses,
            n_lines,
            load_share: 0.6,
            gen_share: 0.3,
            gen_margin: 1.2,
            thermal_range: (0.3, 1.5),
            reactance_range: (0.05, 0.3),
            demand_range: (0.2, 1.0),
        }
    }
}

/// Builds a connected random grid. Same `(spec, seed)` gives the same grid.
///
/// # Panics
/// If `n_buses < 2` or `n_lines < n_buses - 1`.
pub fn random_network(spec: &SyntheticSpec, seed: u64) -> Network {
    assert!(spec.n_buses >= 2, "need at least two buses");
    assert!(
        spec.n_lines + 1 >= spec.n_buses,
        "need at least n_buses - 1 lines for a spanning tree"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n_buses;
    let buses: Vec<Bus> = (1..=n as u32)
        .map(|i| Bus {
            id: BusId(i),
            name: format!("bus{i}"),
        })
        .collect();

    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(spec.n_lines);
    let mut perm: Vec<u32> = (1..=n as u32).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    for i in 1..n {
        let parent = perm[rng.random_range(0..i)];
        pairs.push((parent, perm[i]));
    }
    let max_simple = n * (n - 1) / 2;
    while pairs.len() < spec.n_lines {
        let a = rng.random_range(1..=n as u32);
        let b = rng.random_range(1..=n as u32);
        if a == b {
            continue;
        }
        let exists = pairs
            .iter()
            .any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a));
        if exists && pairs.len() < max_simple {
            continue;
        }
        pairs.push((a, b));
    }

    let lines: Vec<Line> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(f, t))| {
            let x = rng.random_range(spec.reactance_range.0..=spec.reactance_range.1);
            let rate = rng.random_range(spec.thermal_range.0..=spec.thermal_range.1);
            Line {
                id: LineId(i as u32 + 1),
                from_bus: BusId(f),
                to_bus: BusId(t),
                susceptance_b: -1.0 / x,
                thermal_limit: round4(rate),
                angle_diff_max: DEFAULT_ANGLE_DIFF_MAX,
            }
        })
        .collect();

    let mut loads = Vec::new();
    for i in 1..=n as u32 {
        if rng.random_bool(spec.load_share) {
            let pd = rng.random_range(spec.demand_range.0..=spec.demand_range.1);
            loads.push(Load {
                id: loads.len() as u32 + 1,
                bus: BusId(i),
                p_demand: round4(pd),
            });
        }
    }
    if loads.is_empty() {
        loads.push(Load {
            id: 1,
            bus: BusId(rng.random_range(1..=n as u32)),
            p_demand: round4(spec.demand_range.1),
        });
    }
    let total_demand: f64 = loads.iter().map(|d| d.p_demand).sum();

    let mut gen_buses: Vec<u32> = (1..=n as u32)
        .filter(|_| rng.random_bool(spec.gen_share))
        .collect();
    if gen_buses.is_empty() {
        gen_buses.push(rng.random_range(1..=n as u32));
    }
    let weights: Vec<f64> = gen_buses
        .iter()
        .map(|_| rng.random_range(0.5..1.5))
        .collect();
    let wsum: f64 = weights.iter().sum();
    let generators = gen_buses
        .iter()
        .zip(&weights)
        .enumerate()
        .map(|(i, (&b, w))| Generator {
            id: i as u32 + 1,
            bus: BusId(b),
            p_max: round4(spec.gen_margin * total_demand * w / wsum),
        })
        .collect();

    Network::new(100.0, buses, lines, generators, loads).expect("synthetic grid is valid")
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Three buses in a triangle with one generator and two loads of different
/// size. Line 3 (bus 2 to bus 3) is weak, so whichever of lines 1 and 2 is
/// energized first decides which load is served in full.
///
/// | line | from | to | x   | rating |
/// |------|------|----|-----|--------|
/// | 1    | 1    | 2  | 0.1 | 2.0    |
/// | 2    | 1    | 3  | 0.1 | 2.0    |
/// | 3    | 2    | 3  | 0.2 | 0.3    |
///
/// Generator at bus 1 with 3.0 p.u.; loads of 1.0 p.u. at bus 2 and 0.5 p.u. at bus 3.
pub fn reference_three_bus() -> Network {
    let line = |id: u32, f: u32, t: u32, x: f64, rate: f64| Line {
        id: LineId(id),
        from_bus: BusId(f),
        to_bus: BusId(t),
        susceptance_b: -1.0 / x,
        thermal_limit: rate,
        angle_diff_max: DEFAULT_ANGLE_DIFF_MAX,
    };
    Network::new(
        100.0,
        (1..=3)
            .map(|i| Bus {
                id: BusId(i),
                name: i.to_string(),
            })
            .collect(),
        vec![
            line(1, 1, 2, 0.1, 2.0),
            line(2, 1, 3, 0.1, 2.0),
            line(3, 2, 3, 0.2, 0.3),
        ],
        vec![Generator {
            id: 1,
            bus: BusId(1),
            p_max: 3.0,
        }],
        vec![
            Load {
                id: 1,
                bus: BusId(2),
                p_demand: 1.0,
            },
            Load {
                id: 2,
                bus: BusId(3),
                p_demand: 0.5,
            },
        ],
    )
    .expect("reference grid is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_grid_has_requested_shape() {
        let net = random_network(&SyntheticSpec::new(8, 10), 42);
        assert_eq!(net.buses().len(), 8);
        assert_eq!(net.lines().len(), 10);
        assert!(!net.generators().is_empty());
        assert!(net.total_generation() > net.total_demand());
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SyntheticSpec::new(6, 9);
        assert_eq!(random_network(&spec, 5), random_network(&spec, 5));
    }
}

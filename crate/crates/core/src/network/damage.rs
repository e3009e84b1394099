use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LineId, Network};

#[derive(Debug, Error, PartialEq)]
pub enum DamageError {
    #[error("damage fraction {0} is outside (0, 1]")]
    FractionOutOfRange(f64),
    #[error("line {0} does not exist in the network")]
    UnknownLine(LineId),
    #[error("line {0} is listed twice")]
    Duplicate(LineId),
}

/// The set of physically damaged lines, kept sorted by id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DamageScenario {
    pub damaged_lines: Vec<LineId>,
    pub seed: u64,
    pub fraction: f64,
}

impl DamageScenario {
    /// Explicit damage list. `fraction` is recorded relative to the network size.
    pub fn from_lines(network: &Network, lines: &[LineId]) -> Result<Self, DamageError> {
        let mut set = BTreeSet::new();
        for &id in lines {
            if network.line_position(id).is_none() {
                return Err(DamageError::UnknownLine(id));
            }
            if !set.insert(id) {
                return Err(DamageError::Duplicate(id));
            }
        }
        let fraction = if network.lines().is_empty() {
            0.0
        } else {
            set.len() as f64 / network.lines().len() as f64
        };
        Ok(DamageScenario {
            damaged_lines: set.into_iter().collect(),
            seed: 0,
            fraction,
        })
    }

    pub fn len(&self) -> usize {
        self.damaged_lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.damaged_lines.is_empty()
    }

    pub fn contains(&self, id: LineId) -> bool {
        self.damaged_lines.binary_search(&id).is_ok()
    }

    pub fn as_set(&self) -> BTreeSet<LineId> {
        self.damaged_lines.iter().copied().collect()
    }
}

/// Damages `round_half_up(fraction * |lines|)` distinct lines.
///
/// Selection is a partial Fisher-Yates shuffle over line positions driven by
/// `ChaCha8Rng::seed_from_u64(seed)`; the chosen ids are returned sorted.
pub fn random_damage(
    network: &Network,
    fraction: f64,
    seed: u64,
) -> Result<DamageScenario, DamageError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(DamageError::FractionOutOfRange(fraction));
    }
    let n = network.lines().len();
    // The epsilon keeps products like 0.7 * 38 = 26.599999... on the intended side.
    let count = ((fraction * n as f64 + 0.5 + 1e-9).floor() as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.random_range(i..n);
        order.swap(i, j);
    }
    let mut damaged: Vec<LineId> = order[..count]
        .iter()
        .map(|&p| network.lines()[p].id)
        .collect();
    damaged.sort();
    Ok(DamageScenario {
        damaged_lines: damaged,
        seed,
        fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{random_network, SyntheticSpec};

    fn net(lines: usize) -> Network {
        random_network(&SyntheticSpec::new(lines.min(12).max(4), lines), 3)
    }

    #[test]
    fn full_fraction_damages_everything() {
        let n = net(10);
        let d = random_damage(&n, 1.0, 7).unwrap();
        assert_eq!(d.len(), 10);
    }

    #[test]
    fn counts_match_reference_table() {
        let n = net(38);
        let counts: Vec<usize> = (1..=10)
            .map(|i| random_damage(&n, i as f64 / 10.0, 1).unwrap().len())
            .collect();
        assert_eq!(counts, vec![4, 8, 11, 15, 19, 23, 27, 30, 34, 38]);
    }

    #[test]
    fn same_seed_same_scenario() {
        let n = net(20);
        assert_eq!(
            random_damage(&n, 0.3, 11).unwrap(),
            random_damage(&n, 0.3, 11).unwrap()
        );
        assert_ne!(
            random_damage(&n, 0.3, 11).unwrap().damaged_lines,
            random_damage(&n, 0.3, 12).unwrap().damaged_lines
        );
    }

    #[test]
    fn rejects_bad_fraction() {
        let n = net(5);
        assert!(random_damage(&n, 0.0, 1).is_err());
        assert!(random_damage(&n, 1.5, 1).is_err());
        assert!(random_damage(&n, f64::NAN, 1).is_err());
    }

    #[test]
    fn every_line_eventually_selected() {
        let n = net(20);
        let mut hit = BTreeSet::new();
        for seed in 0..1000 {
            hit.extend(random_damage(&n, 0.05, seed).unwrap().damaged_lines);
        }
        assert_eq!(hit.len(), 20);
    }

    #[test]
    fn explicit_list_is_validated() {
        let n = net(5);
        let ids: Vec<LineId> = n.lines().iter().map(|l| l.id).collect();
        let d = DamageScenario::from_lines(&n, &[ids[3], ids[1]]).unwrap();
        assert_eq!(d.damaged_lines, vec![ids[1], ids[3]]);
        assert!(DamageScenario::from_lines(&n, &[ids[1], ids[1]]).is_err());
        assert!(DamageScenario::from_lines(&n, &[LineId(999)]).is_err());
    }
}

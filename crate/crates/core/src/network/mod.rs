//! Grid data model: buses, lines, generators and loads in per-unit, plus the
//! overlays (damage, schedules, plans) that restoration algorithms work on.
//!
//! A [`Network`] is immutable once built. Damage and restoration plans never
//! mutate it; algorithms that need a modified grid derive a new value with
//! [`Network::without_lines`].

mod damage;
mod matpower;
mod plan;
mod schedule;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use damage::{random_damage, DamageError, DamageScenario};
pub use matpower::{parse_case, ParseError};
pub use plan::{PlanError, RestorationPlan};
pub use schedule::{build_schedule, round_half_up, PeriodSchedule};

/// Angle-difference limit used when the case file leaves it unconstrained (30°).
pub const DEFAULT_ANGLE_DIFF_MAX: f64 = std::f64::consts::FRAC_PI_6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LineId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for LineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: LineId,
    pub from_bus: BusId,
    pub to_bus: BusId,
    /// Series susceptance `b = -1/x` in per-unit, sign as given by the case.
    pub susceptance_b: f64,
    /// Thermal rating in per-unit MW.
    pub thermal_limit: f64,
    /// Largest allowed voltage-angle difference across the line, radians.
    pub angle_diff_max: f64,
}

impl Line {
    /// Flow capacity once the angle-difference limit is folded into the
    /// thermal rating: `|P| <= min(rating, |b| * angle_diff_max)`.
    pub fn flow_capacity(&self) -> f64 {
        self.thermal_limit
            .min(self.susceptance_b.abs() * self.angle_diff_max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: u32,
    pub bus: BusId,
    pub p_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub id: u32,
    pub bus: BusId,
    pub p_demand: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("network has no buses")]
    NoBuses,
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u32 },
    #[error("{kind} {id} references unknown bus {bus}")]
    UnknownBus {
        kind: &'static str,
        id: u32,
        bus: BusId,
    },
    #[error("line {0} connects a bus to itself")]
    SelfLoop(LineId),
    #[error("line {id}: {reason}")]
    InvalidLine { id: LineId, reason: &'static str },
    #[error("generator {0} has negative or non-finite p_max")]
    InvalidGenerator(u32),
    #[error("load {0} has negative or non-finite demand")]
    InvalidLoad(u32),
    #[error("base_mva must be positive")]
    InvalidBase,
    #[error("unknown line {0}")]
    UnknownLine(LineId),
}

/// Serialized shape of a [`Network`]; incidence indices are rebuilt on load.
#[derive(Serialize, Deserialize)]
struct NetworkData {
    base_mva: f64,
    buses: Vec<Bus>,
    lines: Vec<Line>,
    generators: Vec<Generator>,
    loads: Vec<Load>,
}

/// Immutable per-unit grid with per-bus incidence indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkData", into = "NetworkData")]
pub struct Network {
    base_mva: f64,
    buses: Vec<Bus>,
    lines: Vec<Line>,
    generators: Vec<Generator>,
    loads: Vec<Load>,
    bus_index: BTreeMap<BusId, usize>,
    line_index: BTreeMap<LineId, usize>,
    bus_lines: Vec<Vec<usize>>,
    bus_generators: Vec<Vec<usize>>,
    bus_loads: Vec<Vec<usize>>,
}

impl TryFrom<NetworkData> for Network {
    type Error = NetworkError;

    fn try_from(d: NetworkData) -> Result<Self, Self::Error> {
        Network::new(d.base_mva, d.buses, d.lines, d.generators, d.loads)
    }
}

impl From<Network> for NetworkData {
    fn from(n: Network) -> Self {
        NetworkData {
            base_mva: n.base_mva,
            buses: n.buses,
            lines: n.lines,
            generators: n.generators,
            loads: n.loads,
        }
    }
}

impl Network {
    pub fn new(
        base_mva: f64,
        buses: Vec<Bus>,
        lines: Vec<Line>,
        generators: Vec<Generator>,
        loads: Vec<Load>,
    ) -> Result<Self, NetworkError> {
        if buses.is_empty() {
            return Err(NetworkError::NoBuses);
        }
        if !(base_mva > 0.0 && base_mva.is_finite()) {
            return Err(NetworkError::InvalidBase);
        }
        let mut bus_index = BTreeMap::new();
        for (i, b) in buses.iter().enumerate() {
            if bus_index.insert(b.id, i).is_some() {
                return Err(NetworkError::DuplicateId {
                    kind: "bus",
                    id: b.id.0,
                });
            }
        }
        let lookup = |kind: &'static str, id: u32, bus: BusId| {
            bus_index
                .get(&bus)
                .copied()
                .ok_or(NetworkError::UnknownBus { kind, id, bus })
        };

        let mut bus_lines = vec![Vec::new(); buses.len()];
        let mut line_index = BTreeMap::new();
        for (i, l) in lines.iter().enumerate() {
            if line_index.insert(l.id, i).is_some() {
                return Err(NetworkError::DuplicateId {
                    kind: "line",
                    id: l.id.0,
                });
            }
            if l.from_bus == l.to_bus {
                return Err(NetworkError::SelfLoop(l.id));
            }
            let f = lookup("line", l.id.0, l.from_bus)?;
            let t = lookup("line", l.id.0, l.to_bus)?;
            if !(l.thermal_limit >= 0.0 && l.thermal_limit.is_finite()) {
                return Err(NetworkError::InvalidLine {
                    id: l.id,
                    reason: "thermal limit must be finite and non-negative",
                });
            }
            if !(l.angle_diff_max > 0.0 && l.angle_diff_max.is_finite()) {
                return Err(NetworkError::InvalidLine {
                    id: l.id,
                    reason: "angle difference limit must be positive",
                });
            }
            if !(l.susceptance_b.is_finite() && l.susceptance_b != 0.0) {
                return Err(NetworkError::InvalidLine {
                    id: l.id,
                    reason: "susceptance must be finite and non-zero",
                });
            }
            bus_lines[f].push(i);
            bus_lines[t].push(i);
        }

        let mut bus_generators = vec![Vec::new(); buses.len()];
        let mut seen = BTreeSet::new();
        for (i, g) in generators.iter().enumerate() {
            if !seen.insert(g.id) {
                return Err(NetworkError::DuplicateId {
                    kind: "generator",
                    id: g.id,
                });
            }
            if !(g.p_max >= 0.0 && g.p_max.is_finite()) {
                return Err(NetworkError::InvalidGenerator(g.id));
            }
            bus_generators[lookup("generator", g.id, g.bus)?].push(i);
        }

        let mut bus_loads = vec![Vec::new(); buses.len()];
        seen.clear();
        for (i, d) in loads.iter().enumerate() {
            if !seen.insert(d.id) {
                return Err(NetworkError::DuplicateId {
                    kind: "load",
                    id: d.id,
                });
            }
            if !(d.p_demand >= 0.0 && d.p_demand.is_finite()) {
                return Err(NetworkError::InvalidLoad(d.id));
            }
            bus_loads[lookup("load", d.id, d.bus)?].push(i);
        }

        Ok(Network {
            base_mva,
            buses,
            lines,
            generators,
            loads,
            bus_index,
            line_index,
            bus_lines,
            bus_generators,
            bus_loads,
        })
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn loads(&self) -> &[Load] {
        &self.loads
    }

    pub fn bus_position(&self, id: BusId) -> Option<usize> {
        self.bus_index.get(&id).copied()
    }

    pub fn line_position(&self, id: LineId) -> Option<usize> {
        self.line_index.get(&id).copied()
    }

    pub fn line(&self, id: LineId) -> Option<&Line> {
        self.line_position(id).map(|i| &self.lines[i])
    }

    /// Positions (into [`Network::lines`]) of lines incident to the bus at `bus_pos`.
    pub fn lines_at(&self, bus_pos: usize) -> &[usize] {
        &self.bus_lines[bus_pos]
    }

    pub fn generators_at(&self, bus_pos: usize) -> &[usize] {
        &self.bus_generators[bus_pos]
    }

    pub fn loads_at(&self, bus_pos: usize) -> &[usize] {
        &self.bus_loads[bus_pos]
    }

    /// Endpoint bus positions of the line at `line_pos`.
    pub fn endpoints(&self, line_pos: usize) -> (usize, usize) {
        let l = &self.lines[line_pos];
        (self.bus_index[&l.from_bus], self.bus_index[&l.to_bus])
    }

    pub fn total_demand(&self) -> f64 {
        self.loads.iter().map(|d| d.p_demand).sum()
    }

    pub fn total_generation(&self) -> f64 {
        self.generators.iter().map(|g| g.p_max).sum()
    }

    /// Copy of this network with the given lines removed. Unknown ids are an error.
    pub fn without_lines(&self, removed: &BTreeSet<LineId>) -> Result<Network, NetworkError> {
        if let Some(id) = removed.iter().find(|id| !self.line_index.contains_key(id)) {
            return Err(NetworkError::UnknownLine(*id));
        }
        let lines = self
            .lines
            .iter()
            .filter(|l| !removed.contains(&l.id))
            .cloned()
            .collect();
        Network::new(
            self.base_mva,
            self.buses.clone(),
            lines,
            self.generators.clone(),
            self.loads.clone(),
        )
    }

    /// Component label of every bus when only lines with `energized(line_pos)`
    /// are in service. The label is the lowest bus position in the component.
    pub fn components(&self, energized: impl Fn(usize) -> bool) -> Vec<usize> {
        let mut uf = UnionFind::<usize>::new(self.buses.len());
        for pos in (0..self.lines.len()).filter(|&p| energized(p)) {
            let (a, b) = self.endpoints(pos);
            uf.union(a, b);
        }
        let mut lowest = vec![usize::MAX; self.buses.len()];
        for bus in 0..self.buses.len() {
            let root = uf.find(bus);
            lowest[root] = lowest[root].min(bus);
        }
        (0..self.buses.len()).map(|bus| lowest[uf.find(bus)]).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Network, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bus(id: u32) -> Bus {
        Bus {
            id: BusId(id),
            name: id.to_string(),
        }
    }

    fn line(id: u32, f: u32, t: u32) -> Line {
        Line {
            id: LineId(id),
            from_bus: BusId(f),
            to_bus: BusId(t),
            susceptance_b: -10.0,
            thermal_limit: 1.0,
            angle_diff_max: DEFAULT_ANGLE_DIFF_MAX,
        }
    }

    #[test]
    fn incidence_indices_follow_components() {
        let net = Network::new(
            100.0,
            vec![bus(1), bus(2), bus(3)],
            vec![line(1, 1, 2), line(2, 2, 3)],
            vec![Generator {
                id: 1,
                bus: BusId(1),
                p_max: 2.0,
            }],
            vec![Load {
                id: 1,
                bus: BusId(3),
                p_demand: 1.0,
            }],
        )
        .unwrap();
        assert_eq!(net.lines_at(1), &[0, 1]);
        assert_eq!(net.generators_at(0), &[0]);
        assert_eq!(net.loads_at(2), &[0]);
        assert_eq!(net.endpoints(1), (1, 2));
    }

    #[test]
    fn rejects_bad_components() {
        let err = Network::new(100.0, vec![bus(1)], vec![line(1, 1, 9)], vec![], vec![]);
        assert!(matches!(err, Err(NetworkError::UnknownBus { .. })));
        let err = Network::new(100.0, vec![bus(1), bus(2)], vec![line(1, 1, 1)], vec![], vec![]);
        assert_eq!(err.unwrap_err(), NetworkError::SelfLoop(LineId(1)));
        let err = Network::new(100.0, vec![], vec![], vec![], vec![]);
        assert_eq!(err.unwrap_err(), NetworkError::NoBuses);
        let mut l = line(1, 1, 2);
        l.angle_diff_max = 0.0;
        assert!(Network::new(100.0, vec![bus(1), bus(2)], vec![l], vec![], vec![]).is_err());
    }

    #[test]
    fn json_round_trip_rebuilds_indices() {
        let net = Network::new(
            100.0,
            vec![bus(1), bus(2)],
            vec![line(4, 1, 2)],
            vec![],
            vec![Load {
                id: 1,
                bus: BusId(2),
                p_demand: 0.3,
            }],
        )
        .unwrap();
        let back = Network::from_json(&net.to_json()).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.line_position(LineId(4)), Some(0));
    }

    #[test]
    fn flow_capacity_folds_angle_limit() {
        let mut l = line(1, 1, 2);
        l.thermal_limit = 100.0;
        assert!((l.flow_capacity() - 10.0 * DEFAULT_ANGLE_DIFF_MAX).abs() < 1e-12);
        l.thermal_limit = 0.5;
        assert_eq!(l.flow_capacity(), 0.5);
    }
}

//! Restoration ordering for damaged transmission grids.
//!
//! The crate builds DC-power-flow restoration models over a [`network::Network`],
//! solves them with its own simplex and branch-and-bound engines, and orders
//! line repairs with the UTIL, RRR and RAD algorithms. See the `examples/`
//! directory for one runnable program per capability.

pub mod analysis;
pub mod bench;
pub mod heuristics;
pub mod lp;
pub mod milp;
pub mod models;
pub mod network;
pub mod synthetic;

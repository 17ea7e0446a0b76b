//! Deterministic multiagent maze exploration.
//!
//! A fleet of agents explores a randomly generated grid maze. Each agent
//! senses a small window around itself with line-of-sight occlusion, shares
//! its private map with peers inside broadcast range, and picks exploration
//! goals inside its own Voronoi region. The crate ships the cost-utility
//! strategy with local Voronoi partitioning (`CULVP`) together with five
//! Voronoi-adapted baselines, the six run metrics, and a batch harness that
//! ranks methods with Copeland voting and composite index scoring.
//!
//! The pieces, bottom-up:
//! - [`grid`]: cell alphabet, dense 2D grids, ground-truth maze generation.
//! - [`perception`]: agent state, occluded sensing, map exchange and its bit cost.
//! - [`partition`]: Voronoi regions, merging on contact, reassignment.
//! - [`pathing`]: wavefront distance fields and shortest paths.
//! - [`strategies`]: goal selection policies.
//! - [`engine`]: the round loop.
//! - [`metrics`]: evaluation quantities of a finished run.
//! - [`experiments`]: experiment matrices, CSV output, rankings.

pub mod engine;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod metrics;
pub mod partition;
pub mod pathing;
pub mod perception;
pub mod strategies;

pub use engine::{run_simulation, Simulation, SimulationConfig};
pub use error::{Error, Result};
pub use grid::{CellState, Grid, Maze, Pos};
pub use metrics::RunMetrics;
pub use strategies::{StrategyConfig, StrategyKind};

/// Identifier of the PRNG used for every random draw; echoed in run metadata.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.3";

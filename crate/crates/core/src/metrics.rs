//! Evaluation quantities of a completed exploration run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellState, Grid, Maze};
use crate::perception::{AgentState, CommLedger};

/// Configuration echo attached to every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub method: String,
    pub rows: usize,
    pub cols: usize,
    pub obstacle_probability: f64,
    pub agents: usize,
    pub seed: u64,
    pub rng: String,
    pub maze_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Seconds.
    pub exploration_time: f64,
    pub rounds: u64,
    /// Total cells traveled by all agents.
    pub exploration_cost: u64,
    /// `None` when nobody had to move.
    pub exploration_efficiency: Option<f64>,
    pub map_quality: f64,
    /// Bits.
    pub comm_cost: u64,
    /// Explored cell count `M` of the central map.
    pub explored: usize,
    pub exchanges: u64,
    pub metadata: RunMetadata,
}

/// Per-round agent step times, averaged over rounds and scaled by `rounds`.
///
/// Each round contributes `sum_i t_si / n`; the per-round values are averaged
/// and multiplied by the number of rounds.
pub fn exploration_time(step_times: &[Vec<f64>], agents: usize, rounds: u64) -> f64 {
    if step_times.is_empty() || agents == 0 {
        return 0.0;
    }
    let per_round: f64 = step_times
        .iter()
        .map(|round| round.iter().sum::<f64>() / agents as f64)
        .sum::<f64>()
        / step_times.len() as f64;
    per_round * rounds as f64
}

pub fn exploration_cost(agents: &[AgentState]) -> u64 {
    agents.iter().map(|a| a.distance_traveled).sum()
}

pub fn exploration_efficiency(explored: usize, cost: u64) -> Result<f64> {
    if cost == 0 {
        return Err(Error::ZeroCost);
    }
    Ok(explored as f64 / cost as f64)
}

/// `(M - error cells) / P`, where error cells are explored cells whose value
/// disagrees with ground truth.
pub fn map_quality(central: &Grid<CellState>, maze: &Maze) -> f64 {
    let mut explored = 0usize;
    let mut errors = 0usize;
    for (pos, &state) in central.iter() {
        if !state.is_known() {
            continue;
        }
        explored += 1;
        let known = if state == CellState::AgentOccupied { CellState::Free } else { state };
        if known != maze.cells[pos] {
            errors += 1;
        }
    }
    (explored - errors) as f64 / maze.ground_truth_area() as f64
}

pub fn comm_cost(ledger: &CommLedger) -> u64 {
    ledger.total_bits
}

//! Heat-equation driven area coverage, restricted to the agent's region.
//!
//! Unexplored cells of the region act as heat sources of strength `a`.
//! Known obstacles, cells occupied by in-range peers and unexplored cells
//! outside the region are held at zero. The field is relaxed with a fixed
//! number of Jacobi sweeps of
//!
//! ```text
//! u(c) <- (sum of the four neighbour values + a * s(c)) / 4
//! ```
//!
//! and the agent steps to its hottest neighbour. When every neighbour reads
//! zero the agent is trapped, and the wavefront path to its nearest frontier
//! is boosted above everything else so it walks out.

use crate::grid::{CellState, Grid, Pos};
use crate::partition::Partition;
use crate::perception::AgentState;

use super::frontier::nearest_frontiers;
use super::{DecisionContext, PeerInfo, StrategyConfig};

/// Linear relaxation problem behind the HEDAC field.
#[derive(Debug, Clone, PartialEq)]
pub struct HedacProblem {
    pub rows: usize,
    pub cols: usize,
    /// Cells that are relaxed; all others stay clamped at zero.
    pub active: Vec<bool>,
    /// Source term `a * s(c)` per cell.
    pub source: Vec<f64>,
}

impl HedacProblem {
    pub fn new(agent: &AgentState, peers: &[PeerInfo], partition: &Partition, strength: f64) -> Self {
        let map = &agent.explored;
        let region = partition.region_of_agent(agent.id);
        let mut active = vec![false; map.len()];
        let mut source = vec![0.0; map.len()];
        for (pos, &state) in map.iter() {
            let idx = map.index_of(pos);
            let in_region = partition.region_at(pos) == region;
            let occupied = peers.iter().any(|p| p.position == pos);
            active[idx] = match state {
                CellState::Obstacle => false,
                CellState::Unexplored => in_region && !occupied,
                _ => !occupied,
            };
            if active[idx] && state == CellState::Unexplored {
                source[idx] = strength;
            }
        }
        Self {
            rows: map.rows(),
            cols: map.cols(),
            active,
            source,
        }
    }

    /// One Jacobi sweep from `u` into `next`.
    pub fn sweep(&self, u: &[f64], next: &mut [f64]) {
        let (rows, cols) = (self.rows, self.cols);
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                if !self.active[i] {
                    next[i] = 0.0;
                    continue;
                }
                let mut sum = self.source[i];
                if r > 0 {
                    sum += u[i - cols];
                }
                if r + 1 < rows {
                    sum += u[i + cols];
                }
                if c > 0 {
                    sum += u[i - 1];
                }
                if c + 1 < cols {
                    sum += u[i + 1];
                }
                next[i] = sum / 4.0;
            }
        }
    }

    /// Runs `iterations` sweeps from a zero field.
    pub fn solve(&self, iterations: usize) -> Grid<f64> {
        let mut u = vec![0.0; self.active.len()];
        let mut next = u.clone();
        for _ in 0..iterations {
            self.sweep(&u, &mut next);
            std::mem::swap(&mut u, &mut next);
        }
        Grid::from_vec(self.rows, self.cols, u).expect("sized from the map")
    }

    /// Largest absolute change one more sweep would make.
    pub fn residual(&self, field: &Grid<f64>) -> f64 {
        let mut next = vec![0.0; field.len()];
        self.sweep(field.as_slice(), &mut next);
        next.iter()
            .zip(field.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn hedac_field(agent: &AgentState, peers: &[PeerInfo], partition: &Partition, config: &StrategyConfig) -> Grid<f64> {
    HedacProblem::new(agent, peers, partition, config.hedac_a).solve(config.hedac_iterations)
}

/// Next cell for a HEDAC agent, or `None` when it should stay put.
pub fn hedac_step(ctx: &DecisionContext<'_>, field: &Grid<f64>, config: &StrategyConfig) -> Option<Pos> {
    let agent = ctx.agent;
    let map = &agent.explored;
    let options: Vec<Pos> = map
        .neighbors4(agent.position)
        .filter(|&n| map[n] != CellState::Obstacle)
        .filter(|&n| !config.anti_collision || ctx.peers.iter().all(|p| p.position != n))
        .collect();
    let best = |values: &dyn Fn(Pos) -> f64| -> Option<Pos> {
        let mut best: Option<(Pos, f64)> = None;
        for &n in &options {
            let v = values(n);
            if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                best = Some((n, v));
            }
        }
        best.map(|(p, _)| p)
    };

    if let Some(next) = best(&|n| field[n]) {
        return Some(next);
    }

    let target = nearest_frontiers(ctx).first()?.cell;
    let path = ctx.field.extract_path(target).ok()?;
    let bonus = 1.0 + field.as_slice().iter().copied().fold(0.0, f64::max);
    best(&|n| if path.contains(&n) { field[n] + bonus } else { field[n] })
}

//! Agent-local sensing, private maps, and broadcast-range map exchange.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellState, Grid, Maze, Pos};

pub const DEFAULT_VIEW_RANGE: usize = 2;
pub const DEFAULT_BROADCAST_FRACTION: f64 = 0.25;

/// One exploring agent and everything it privately knows.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: usize,
    pub position: Pos,
    pub explored: Grid<CellState>,
    pub view_range: usize,
    pub goal: Option<Pos>,
    /// Cells still to cross, nearest first; never contains `position`.
    pub path: Vec<Pos>,
    pub distance_traveled: u64,
}

impl AgentState {
    pub fn new(id: usize, position: Pos, rows: usize, cols: usize, view_range: usize) -> Self {
        Self {
            id,
            position,
            explored: Grid::new(rows, cols, CellState::Unexplored),
            view_range,
            goal: None,
            path: Vec::new(),
            distance_traveled: 0,
        }
    }

    /// Observes every cell in the view window that has a clear line of sight
    /// and records it in the private map.
    pub fn sense(&mut self, maze: &Maze) -> Vec<(Pos, CellState)> {
        let observed: Vec<(Pos, CellState)> = visible_cells(maze, self.position, self.view_range)
            .into_iter()
            .map(|p| (p, maze.cells[p]))
            .collect();
        for &(p, state) in &observed {
            self.explored[p] = state;
        }
        observed
    }

    /// Number of unexplored cells inside the view window centred on `at`.
    pub fn unexplored_in_view(&self, at: Pos) -> usize {
        unexplored_in_window(&self.explored, at, self.view_range)
    }
}

pub fn unexplored_in_window(map: &Grid<CellState>, at: Pos, radius: usize) -> usize {
    map.window(at, radius)
        .filter(|&p| map[p] == CellState::Unexplored)
        .count()
}

/// Cells within Chebyshev distance `range` of `origin` whose centre-to-centre
/// supercover ray is free of obstacles strictly between the endpoints.
pub fn visible_cells(maze: &Maze, origin: Pos, range: usize) -> Vec<Pos> {
    maze.cells
        .window(origin, range)
        .filter(|&target| {
            supercover(origin, target)
                .into_iter()
                .filter(|&p| p != origin && p != target)
                .all(|p| !maze.is_obstacle(p))
        })
        .collect()
}

/// Every cell touched by the segment joining two cell centres, including both
/// side cells when the segment passes exactly through a grid corner.
pub fn supercover(from: Pos, to: Pos) -> Vec<Pos> {
    let (mut y, mut x) = (from.row as i64, from.col as i64);
    let (dy_signed, dx_signed) = (to.row as i64 - y, to.col as i64 - x);
    let ystep = dy_signed.signum();
    let xstep = dx_signed.signum();
    let (dy, dx) = (dy_signed.abs(), dx_signed.abs());
    let (ddy, ddx) = (2 * dy, 2 * dx);
    let mut cells = vec![from];
    let mut push = |y: i64, x: i64| cells.push(Pos::new(y as usize, x as usize));

    if ddx >= ddy {
        let mut error = dx;
        let mut prev = error;
        for _ in 0..dx {
            x += xstep;
            error += ddy;
            if error > ddx {
                y += ystep;
                error -= ddx;
                if error + prev < ddx {
                    push(y - ystep, x);
                } else if error + prev > ddx {
                    push(y, x - xstep);
                } else {
                    push(y - ystep, x);
                    push(y, x - xstep);
                }
            }
            push(y, x);
            prev = error;
        }
    } else {
        let mut error = dy;
        let mut prev = error;
        for _ in 0..dy {
            y += ystep;
            error += ddx;
            if error > ddy {
                x += xstep;
                error -= ddy;
                if error + prev < ddy {
                    push(y, x - xstep);
                } else if error + prev > ddy {
                    push(y - ystep, x);
                } else {
                    push(y, x - xstep);
                    push(y - ystep, x);
                }
            }
            push(y, x);
            prev = error;
        }
    }
    cells
}

/// Broadcast radius for a maze: `fraction` of its larger dimension.
pub fn broadcast_range(rows: usize, cols: usize, fraction: f64) -> f64 {
    fraction * rows.max(cols) as f64
}

/// All index pairs `(i, j)`, `i < j`, whose positions lie within `range`
/// (Euclidean, inclusive).
pub fn broadcast_peers(positions: &[Pos], range: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            if positions[i].euclidean(positions[j]) <= range {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Accumulated bit cost of full-map exchanges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommLedger {
    pub total_bits: u64,
    pub exchanges: u64,
    bits_per_exchange: u64,
}

impl CommLedger {
    /// Two bits per cell, sent in both directions.
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            total_bits: 0,
            exchanges: 0,
            bits_per_exchange: 4 * (rows * cols) as u64,
        }
    }

    pub fn bits_per_exchange(&self) -> u64 {
        self.bits_per_exchange
    }

    pub fn record_exchange(&mut self) {
        self.exchanges += 1;
        self.total_bits += self.bits_per_exchange;
    }
}

fn merge_cell(a: CellState, b: CellState, pos: Pos) -> Result<CellState> {
    use CellState::*;
    let norm = |c| if c == AgentOccupied { Free } else { c };
    match (norm(a), norm(b)) {
        (Unexplored, other) | (other, Unexplored) => Ok(other),
        (x, y) if x == y => Ok(x),
        _ => Err(Error::MapConflict(pos)),
    }
}

/// Merges `source` into `target` cell-wise: any known value overrides
/// `Unexplored`. Returns the number of cells that became known.
pub fn merge_into(target: &mut Grid<CellState>, source: &Grid<CellState>) -> Result<usize> {
    let mut gained = 0;
    for idx in 0..target.len() {
        let pos = target.pos_of(idx);
        let before = target[pos];
        let merged = merge_cell(before, source[pos], pos)?;
        if !before.is_known() && merged.is_known() {
            gained += 1;
        }
        target[pos] = merged;
    }
    Ok(gained)
}

/// Symmetric full-map exchange between two agents in range.
pub fn exchange_maps(a: &mut AgentState, b: &mut AgentState, ledger: &mut CommLedger) -> Result<()> {
    merge_into(&mut a.explored, &b.explored)?;
    b.explored.clone_from(&a.explored);
    ledger.record_exchange();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_maze(rows: usize, cols: usize) -> Maze {
        Maze::from_cells(Grid::new(rows, cols, CellState::Free), 0.0, 0).unwrap()
    }

    #[test]
    fn open_area_sees_full_window() {
        let maze = open_maze(7, 7);
        let mut agent = AgentState::new(0, Pos::new(3, 3), 7, 7, 2);
        let seen = agent.sense(&maze);
        assert_eq!(seen.len(), 25);
        assert_eq!(agent.explored.known_count(), 25);
        assert_eq!(agent.explored[Pos::new(3, 3)], CellState::Free);
    }

    #[test]
    fn obstacle_blocks_the_cell_behind_it() {
        let mut cells = Grid::new(7, 7, CellState::Free);
        cells[Pos::new(3, 4)] = CellState::Obstacle;
        let maze = Maze::from_cells(cells, 0.0, 0).unwrap();
        let mut agent = AgentState::new(0, Pos::new(3, 3), 7, 7, 2);
        agent.sense(&maze);
        assert_eq!(agent.explored[Pos::new(3, 4)], CellState::Obstacle);
        assert_eq!(agent.explored[Pos::new(3, 5)], CellState::Unexplored);
    }

    #[test]
    fn supercover_includes_both_corner_cells() {
        let line = supercover(Pos::new(0, 0), Pos::new(2, 2));
        for p in [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 1), (2, 2)] {
            assert!(line.contains(&Pos::new(p.0, p.1)), "missing {p:?}");
        }
        assert_eq!(line.len(), 7);
        assert_eq!(supercover(Pos::new(4, 4), Pos::new(4, 4)), vec![Pos::new(4, 4)]);
    }

    #[test]
    fn peers_use_inclusive_euclidean_range() {
        let range = broadcast_range(30, 30, DEFAULT_BROADCAST_FRACTION);
        assert_eq!(range, 7.5);
        assert_eq!(broadcast_peers(&[Pos::new(0, 0), Pos::new(0, 5)], range), vec![(0, 1)]);
        assert!(broadcast_peers(&[Pos::new(0, 0)], range).is_empty());
        let line = [Pos::new(0, 0), Pos::new(0, 6), Pos::new(0, 12)];
        assert_eq!(broadcast_peers(&line, range), vec![(0, 1), (1, 2)]);
        assert_eq!(broadcast_peers(&[Pos::new(0, 0), Pos::new(3, 4)], 5.0), vec![(0, 1)]);
    }

    #[test]
    fn exchange_costs_four_bits_per_cell() {
        let mut ledger = CommLedger::new(30, 30);
        let mut a = AgentState::new(0, Pos::new(0, 0), 30, 30, 2);
        let mut b = AgentState::new(1, Pos::new(0, 1), 30, 30, 2);
        exchange_maps(&mut a, &mut b, &mut ledger).unwrap();
        assert_eq!(ledger.total_bits, 3600);
        // identical maps still pay
        exchange_maps(&mut a, &mut b, &mut ledger).unwrap();
        assert_eq!(ledger.total_bits, 7200);
        assert_eq!(ledger.exchanges, 2);
        assert_eq!(CommLedger::new(15, 20).bits_per_exchange() * 7, 8400);
    }

    #[test]
    fn exchange_propagates_known_cells() {
        let mut ledger = CommLedger::new(3, 3);
        let mut a = AgentState::new(0, Pos::new(0, 0), 3, 3, 1);
        let mut b = AgentState::new(1, Pos::new(2, 2), 3, 3, 1);
        a.explored[Pos::new(1, 1)] = CellState::Free;
        b.explored[Pos::new(0, 2)] = CellState::Obstacle;
        b.explored[Pos::new(2, 2)] = CellState::AgentOccupied;
        exchange_maps(&mut a, &mut b, &mut ledger).unwrap();
        for agent in [&a, &b] {
            assert_eq!(agent.explored[Pos::new(1, 1)], CellState::Free);
            assert_eq!(agent.explored[Pos::new(0, 2)], CellState::Obstacle);
            assert_eq!(agent.explored[Pos::new(2, 2)], CellState::Free);
        }
    }

    #[test]
    fn conflicting_maps_are_rejected() {
        let mut ledger = CommLedger::new(2, 2);
        let mut a = AgentState::new(0, Pos::new(0, 0), 2, 2, 1);
        let mut b = AgentState::new(1, Pos::new(1, 1), 2, 2, 1);
        a.explored[Pos::new(0, 1)] = CellState::Free;
        b.explored[Pos::new(0, 1)] = CellState::Obstacle;
        assert!(matches!(
            exchange_maps(&mut a, &mut b, &mut ledger),
            Err(Error::MapConflict(_))
        ));
    }
}

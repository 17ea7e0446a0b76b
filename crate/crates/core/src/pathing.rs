//! Wavefront propagation over a known map and shortest-path extraction.
//!
//! The wavefront is a 4-connected breadth-first flood. Unexplored cells are
//! traversable so agents plan optimistically through unknown space; only
//! cells known to be obstacles block propagation.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::{CellState, Grid, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    pub source: Pos,
    pub dist: Grid<Option<u32>>,
}

/// Wavefront over `map`, blocked only by `Obstacle` cells.
pub fn wavefront(map: &Grid<CellState>, source: Pos) -> Result<DistanceField> {
    if map.get(source) == Some(&CellState::Obstacle) {
        return Err(Error::SourceOnObstacle(source));
    }
    Ok(wavefront_where(map.rows(), map.cols(), source, |p| {
        map[p] != CellState::Obstacle
    }))
}

/// Wavefront with a caller-supplied traversability predicate. The source is
/// always expanded, whatever the predicate says about it.
pub fn wavefront_where(
    rows: usize,
    cols: usize,
    source: Pos,
    passable: impl Fn(Pos) -> bool,
) -> DistanceField {
    let mut dist = Grid::new(rows, cols, None);
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(p) = queue.pop_front() {
        let d = dist[p].expect("queued cells are labelled");
        for n in dist.neighbors4(p) {
            if dist[n].is_none() && passable(n) {
                dist[n] = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    DistanceField { source, dist }
}

impl DistanceField {
    pub fn get(&self, pos: Pos) -> Option<u32> {
        self.dist.get(pos).copied().flatten()
    }

    pub fn is_reachable(&self, pos: Pos) -> bool {
        self.get(pos).is_some()
    }

    /// Shortest path from the first step after the source up to `target`
    /// inclusive. Backtracking prefers neighbours in north, south, west,
    /// east order.
    pub fn extract_path(&self, target: Pos) -> Result<Vec<Pos>> {
        let mut remaining = self.get(target).ok_or(Error::Unreachable(target))?;
        let mut path = Vec::with_capacity(remaining as usize);
        let mut cur = target;
        while remaining > 0 {
            path.push(cur);
            let prev = self
                .dist
                .neighbors4(cur)
                .find(|&n| self.dist[n] == Some(remaining - 1))
                .ok_or_else(|| Error::Invariant(format!("broken distance field at {cur}")))?;
            cur = prev;
            remaining -= 1;
        }
        path.reverse();
        Ok(path)
    }
}

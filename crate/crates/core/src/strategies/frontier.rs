use crate::grid::{CellState, Pos};
use crate::pathing::DistanceField;
use crate::perception::AgentState;

use super::DecisionContext;

/// A frontier cell under evaluation together with its raw and combined scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierCandidate {
    pub cell: Pos,
    pub distance: u32,
    pub u_mnm: f64,
    pub u_jgr: f64,
    pub utility: f64,
}

impl FrontierCandidate {
    pub fn new(cell: Pos, distance: u32) -> Self {
        Self {
            cell,
            distance,
            u_mnm: 0.0,
            u_jgr: 0.0,
            utility: 0.0,
        }
    }
}

/// Reachable unexplored cells of the agent's region, row-major.
pub fn frontiers(ctx: &DecisionContext<'_>) -> Vec<FrontierCandidate> {
    let region = ctx.partition.region_of_agent(ctx.agent.id);
    ctx.partition
        .cells(region)
        .filter(|&c| ctx.agent.explored[c] == CellState::Unexplored)
        .filter_map(|c| ctx.field.get(c).map(|d| FrontierCandidate::new(c, d)))
        .collect()
}

/// Frontiers sharing the minimum wavefront distance. Empty when the region
/// has nothing left to reach.
pub fn nearest_frontiers(ctx: &DecisionContext<'_>) -> Vec<FrontierCandidate> {
    keep_nearest(frontiers(ctx))
}

pub(crate) fn keep_nearest(mut all: Vec<FrontierCandidate>) -> Vec<FrontierCandidate> {
    if let Some(min) = all.iter().map(|c| c.distance).min() {
        all.retain(|c| c.distance == min);
    }
    all
}

/// Sum of Euclidean distances from `frontier` to each position.
pub fn u_mnm(frontier: Pos, positions: impl IntoIterator<Item = Pos>) -> f64 {
    positions.into_iter().map(|p| frontier.euclidean(p)).sum()
}

/// Unexplored cells in view of each cell along the wavefront path to
/// `frontier`, summed without removing overlap between windows.
pub fn u_jgr(frontier: Pos, agent: &AgentState, field: &DistanceField) -> crate::Result<f64> {
    let path = field.extract_path(frontier)?;
    Ok(path.iter().map(|&x| agent.unexplored_in_view(x) as f64).sum())
}

/// Min-max scaling to `[0, 1]`; a constant input maps to all ones.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![1.0; values.len()]
    }
}

use crate::grid::Pos;

/// Errors produced across the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("maze dimensions {rows}x{cols} are too small (minimum 3x3)")]
    DimensionTooSmall { rows: usize, cols: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("failed to parse maze file: {0}")]
    MazeParse(String),

    #[error("maze free space is not connected")]
    DisconnectedMaze,

    #[error("two agents start at the same cell {0}")]
    DuplicatePosition(Pos),

    #[error("wavefront source {0} is an obstacle")]
    SourceOnObstacle(Pos),

    #[error("cell {0} is not reachable from the field source")]
    Unreachable(Pos),

    #[error("map merge conflict at {0}: Free and Obstacle disagree")]
    MapConflict(Pos),

    #[error("not enough free cells ({free}) to place {agents} agents")]
    NotEnoughFreeCells { free: usize, agents: usize },

    #[error("run exceeded {max_rounds} rounds with {unexplored} cells still unexplored")]
    MaxRoundsExceeded { max_rounds: u64, unexplored: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("exploration cost is zero; efficiency is undefined")]
    ZeroCost,

    #[error("method {method} is missing from group {group}")]
    MissingMethod { method: String, group: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

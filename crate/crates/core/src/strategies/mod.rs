//! Goal-selection policies.
//!
//! Every frontier policy chooses among the unexplored cells of the agent's
//! current Voronoi region that its wavefront can reach. HEDAC instead climbs
//! a diffused attraction field one cell at a time.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Pos;
use crate::partition::Partition;
use crate::pathing::DistanceField;
use crate::perception::AgentState;

mod baselines;
mod culvp;
mod frontier;
mod hedac;

pub use baselines::{select_goal_cubso, select_goal_cujgr, select_goal_cumnm, select_goal_nearest};
pub use culvp::{culvp_candidates, select_goal_culvp};
pub use frontier::{frontiers, min_max_normalize, nearest_frontiers, u_jgr, u_mnm, FrontierCandidate};
pub use hedac::{hedac_field, hedac_step, HedacProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Culvp,
    Nearest,
    Cumnm,
    Cujgr,
    Cubso,
    Hedac,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Culvp,
        StrategyKind::Nearest,
        StrategyKind::Cumnm,
        StrategyKind::Cujgr,
        StrategyKind::Cubso,
        StrategyKind::Hedac,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Culvp => "culvp",
            StrategyKind::Nearest => "nearest",
            StrategyKind::Cumnm => "cumnm",
            StrategyKind::Cujgr => "cujgr",
            StrategyKind::Cubso => "cubso",
            StrategyKind::Hedac => "hedac",
        }
    }

    pub fn is_frontier_based(self) -> bool {
        self != StrategyKind::Hedac
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

fn default_lambda() -> f64 {
    0.2
}
fn default_lambda_jgr() -> f64 {
    0.8
}
fn default_hedac_iterations() -> usize {
    100
}
fn default_hedac_a() -> f64 {
    10.0
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_lambda_jgr")]
    pub lambda_jgr: f64,
    #[serde(default = "default_hedac_iterations")]
    pub hedac_iterations: usize,
    #[serde(default = "default_hedac_a")]
    pub hedac_a: f64,
    #[serde(default = "default_true")]
    pub anti_collision: bool,
    /// Name written to result rows; defaults to the kind name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            lambda: default_lambda(),
            lambda_jgr: default_lambda_jgr(),
            hedac_iterations: default_hedac_iterations(),
            hedac_a: default_hedac_a(),
            anti_collision: true,
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda {} must be >= 0", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.lambda_jgr) {
            return Err(Error::InvalidParameter(format!(
                "lambda_jgr {} must lie in [0, 1]",
                self.lambda_jgr
            )));
        }
        if self.hedac_iterations == 0 {
            return Err(Error::InvalidParameter("hedac iterations must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self::new(StrategyKind::Culvp)
    }
}

/// What a deciding agent knows about a peer inside broadcast range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeerInfo {
    pub id: usize,
    pub position: Pos,
    pub goal: Option<Pos>,
}

/// Snapshot handed to a policy for one decision.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext<'a> {
    pub agent: &'a AgentState,
    /// In-range peers only; never contains the deciding agent.
    pub peers: &'a [PeerInfo],
    pub partition: &'a Partition,
    /// Wavefront from the agent's position over its own map.
    pub field: &'a DistanceField,
}

/// Picks a goal with a frontier policy. `None` means the agent's region has
/// no reachable unexplored cell left.
pub fn select_goal(ctx: &DecisionContext<'_>, config: &StrategyConfig) -> Option<Pos> {
    match config.kind {
        StrategyKind::Culvp => select_goal_culvp(ctx, config.lambda),
        StrategyKind::Nearest => select_goal_nearest(ctx),
        StrategyKind::Cumnm => select_goal_cumnm(ctx),
        StrategyKind::Cujgr => select_goal_cujgr(ctx, config.lambda_jgr),
        StrategyKind::Cubso => select_goal_cubso(ctx),
        StrategyKind::Hedac => nearest_frontiers(ctx).first().map(|c| c.cell),
    }
}

/// Index of the first maximum; earlier entries win ties.
pub(crate) fn argmax_first(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

//! Cost-utility goal selection with local Voronoi partitioning.
//!
//! Among the nearest reachable frontiers of the agent's region, each
//! candidate is scored by
//!
//! ```text
//! utility(f) = N(u_mnm(f)) + lambda * N(u_jgr(f))
//! ```
//!
//! where `N` is min-max normalisation over the candidate set, `u_mnm` is the
//! summed Euclidean distance from `f` to the agent and its in-range peers and
//! `u_jgr` counts unexplored cells in view along the wavefront path to `f`.
//! Goals held by in-range peers are excluded first, provided the region has
//! at least as many frontiers as agents sharing it.

use std::collections::BTreeSet;

use crate::grid::Pos;

use super::frontier::{frontiers, keep_nearest, min_max_normalize, u_jgr, u_mnm, FrontierCandidate};
use super::{argmax_first, DecisionContext};

/// Scored candidate set, in row-major order.
pub fn culvp_candidates(ctx: &DecisionContext<'_>, lambda: f64) -> Vec<FrontierCandidate> {
    let all = frontiers(ctx);
    let region = ctx.partition.region_of_agent(ctx.agent.id);
    let sharing = ctx
        .peers
        .iter()
        .filter(|p| ctx.partition.region_of_agent(p.id) == region)
        .count();
    let claimed: BTreeSet<Pos> = ctx.peers.iter().filter_map(|p| p.goal).collect();

    let pool = if all.len() > sharing && !claimed.is_empty() {
        let open: Vec<FrontierCandidate> =
            all.iter().copied().filter(|c| !claimed.contains(&c.cell)).collect();
        if open.is_empty() {
            all
        } else {
            open
        }
    } else {
        all
    };

    let mut candidates = keep_nearest(pool);
    let positions: Vec<Pos> = std::iter::once(ctx.agent.position)
        .chain(ctx.peers.iter().map(|p| p.position))
        .collect();
    for c in &mut candidates {
        c.u_mnm = u_mnm(c.cell, positions.iter().copied());
        c.u_jgr = u_jgr(c.cell, ctx.agent, ctx.field).expect("frontiers are reachable");
    }
    let mnm = min_max_normalize(&candidates.iter().map(|c| c.u_mnm).collect::<Vec<_>>());
    let jgr = min_max_normalize(&candidates.iter().map(|c| c.u_jgr).collect::<Vec<_>>());
    for (i, c) in candidates.iter_mut().enumerate() {
        c.utility = mnm[i] + lambda * jgr[i];
    }
    candidates
}

pub fn select_goal_culvp(ctx: &DecisionContext<'_>, lambda: f64) -> Option<Pos> {
    let candidates = culvp_candidates(ctx, lambda);
    argmax_first(candidates.iter().map(|c| c.utility)).map(|i| candidates[i].cell)
}

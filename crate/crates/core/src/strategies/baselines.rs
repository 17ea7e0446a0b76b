//! Voronoi-adapted frontier baselines: nearest frontier, CU-MNM, CU-JGR and
//! CU-BSO. All of them choose among the reachable unexplored cells of the
//! agent's current region; ties fall to the row-major first cell.

use std::collections::VecDeque;

use crate::grid::{CellState, Grid, Pos};

use super::frontier::{frontiers, min_max_normalize, nearest_frontiers, u_mnm};
use super::{argmax_first, DecisionContext};

pub fn select_goal_nearest(ctx: &DecisionContext<'_>) -> Option<Pos> {
    nearest_frontiers(ctx).first().map(|c| c.cell)
}

/// Dispersion utility against travel cost: `N(u_mnm) - N(dist)`.
pub fn select_goal_cumnm(ctx: &DecisionContext<'_>) -> Option<Pos> {
    let all = frontiers(ctx);
    let positions: Vec<Pos> = std::iter::once(ctx.agent.position)
        .chain(ctx.peers.iter().map(|p| p.position))
        .collect();
    let utility: Vec<f64> = all.iter().map(|c| u_mnm(c.cell, positions.iter().copied())).collect();
    let cost: Vec<f64> = all.iter().map(|c| c.distance as f64).collect();
    let (nu, nc) = (min_max_normalize(&utility), min_max_normalize(&cost));
    argmax_first((0..all.len()).map(|i| nu[i] - nc[i])).map(|i| all[i].cell)
}

/// Information gain at the goal against travel cost:
/// `lambda * N(gain) - (1 - lambda) * N(dist)`.
pub fn select_goal_cujgr(ctx: &DecisionContext<'_>, lambda: f64) -> Option<Pos> {
    let all = frontiers(ctx);
    let gain: Vec<f64> = all
        .iter()
        .map(|c| ctx.agent.unexplored_in_view(c.cell) as f64)
        .collect();
    let cost: Vec<f64> = all.iter().map(|c| c.distance as f64).collect();
    let (ng, nc) = (min_max_normalize(&gain), min_max_normalize(&cost));
    argmax_first((0..all.len()).map(|i| lambda * ng[i] - (1.0 - lambda) * nc[i])).map(|i| all[i].cell)
}

/// Balanced spatial allocation: a wavefront is grown from every frontier and
/// the frontier's rank is the number of in-range peers strictly closer to it
/// than the deciding agent. Lowest rank wins, then own distance.
pub fn select_goal_cubso(ctx: &DecisionContext<'_>) -> Option<Pos> {
    let all = frontiers(ctx);
    if ctx.peers.is_empty() {
        return all.iter().min_by_key(|c| (c.distance, c.cell)).map(|c| c.cell);
    }
    let peers: Vec<Pos> = ctx.peers.iter().map(|p| p.position).collect();
    let mut scratch = RankScratch::new(&ctx.agent.explored);
    all.iter()
        .map(|c| {
            let rank = scratch.peers_closer(&ctx.agent.explored, c.cell, ctx.agent.position, &peers);
            (rank, c.distance, c.cell)
        })
        .min()
        .map(|(_, _, cell)| cell)
}

/// Reusable BFS buffers for per-frontier wavefronts.
struct RankScratch {
    stamp: Grid<u32>,
    dist: Grid<u32>,
    generation: u32,
    queue: VecDeque<Pos>,
}

impl RankScratch {
    fn new(map: &Grid<CellState>) -> Self {
        Self {
            stamp: Grid::new(map.rows(), map.cols(), 0),
            dist: Grid::new(map.rows(), map.cols(), 0),
            generation: 0,
            queue: VecDeque::new(),
        }
    }

    /// Grows a wavefront from `frontier` until `me` is reached and counts the
    /// peers labelled at a strictly smaller distance.
    fn peers_closer(&mut self, map: &Grid<CellState>, frontier: Pos, me: Pos, peers: &[Pos]) -> usize {
        self.generation += 1;
        let generation = self.generation;
        self.queue.clear();
        self.stamp[frontier] = generation;
        self.dist[frontier] = 0;
        self.queue.push_back(frontier);
        let mut my_dist = None;
        while let Some(p) = self.queue.pop_front() {
            let d = self.dist[p];
            if p == me {
                my_dist = Some(d);
                break;
            }
            for n in map.neighbors4(p) {
                if self.stamp[n] != generation && map[n] != CellState::Obstacle {
                    self.stamp[n] = generation;
                    self.dist[n] = d + 1;
                    self.queue.push_back(n);
                }
            }
        }
        let Some(my_dist) = my_dist else { return peers.len() };
        peers
            .iter()
            .filter(|&&q| self.stamp[q] == generation && self.dist[q] < my_dist)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Partition;
    use crate::pathing::wavefront;
    use crate::perception::AgentState;
    use crate::strategies::PeerInfo;

    struct Setup {
        agent: AgentState,
        partition: Partition,
    }

    fn setup(rows: usize, cols: usize, at: Pos, unexplored: &[(usize, usize)], range: usize) -> Setup {
        let mut agent = AgentState::new(0, at, rows, cols, range);
        agent.explored = Grid::new(rows, cols, CellState::Free);
        for &(r, c) in unexplored {
            agent.explored[Pos::new(r, c)] = CellState::Unexplored;
        }
        let partition = Partition::voronoi(&[at], rows, cols).unwrap();
        Setup { agent, partition }
    }

    #[test]
    fn nearest_picks_closest_then_row_major() {
        let s = setup(1, 10, Pos::new(0, 4), &[(0, 2), (0, 9)], 1);
        let field = wavefront(&s.agent.explored, s.agent.position).unwrap();
        let ctx = DecisionContext { agent: &s.agent, peers: &[], partition: &s.partition, field: &field };
        assert_eq!(select_goal_nearest(&ctx), Some(Pos::new(0, 2)));

        let s = setup(9, 9, Pos::new(4, 4), &[(4, 8), (0, 4), (8, 4)], 1);
        let field = wavefront(&s.agent.explored, s.agent.position).unwrap();
        let ctx = DecisionContext { agent: &s.agent, peers: &[], partition: &s.partition, field: &field };
        assert_eq!(select_goal_nearest(&ctx), Some(Pos::new(0, 4)));
    }

    #[test]
    fn no_frontier_means_no_goal() {
        let s = setup(3, 3, Pos::new(1, 1), &[], 1);
        let field = wavefront(&s.agent.explored, s.agent.position).unwrap();
        let ctx = DecisionContext { agent: &s.agent, peers: &[], partition: &s.partition, field: &field };
        assert_eq!(select_goal_nearest(&ctx), None);
        assert_eq!(select_goal_cumnm(&ctx), None);
        assert_eq!(select_goal_cujgr(&ctx, 0.8), None);
        assert_eq!(select_goal_cubso(&ctx), None);
    }

    #[test]
    fn cumnm_prefers_frontier_away_from_peers_at_equal_cost() {
        let s = setup(5, 5, Pos::new(2, 2), &[(0, 2), (4, 2)], 1);
        let field = wavefront(&s.agent.explored, s.agent.position).unwrap();
        let peers = [PeerInfo { id: 1, position: Pos::new(0, 0), goal: None }];
        let ctx = DecisionContext { agent: &s.agent, peers: &peers, partition: &s.partition, field: &field };
        assert_eq!(select_goal_cumnm(&ctx), Some(Pos::new(4, 2)));
    }

    #[test]
    fn cujgr_prefers_nearer_on_equal_gain() {
        let s = setup(1, 12, Pos::new(0, 5), &[(0, 2), (0, 11)], 1);
        let field = wavefront(&s.agent.explored, s.agent.position).unwrap();
        let ctx = DecisionContext { agent: &s.agent, peers: &[], partition: &s.partition, field: &field };
        assert_eq!(select_goal_cujgr(&ctx, 0.8), Some(Pos::new(0, 2)));
    }

    #[test]
    fn cubso_avoids_frontiers_claimed_by_closer_peers() {
        let s = setup(1, 11, Pos::new(0, 5), &[(0, 0), (0, 10)], 1);
        let field = wavefront(&s.agent.explored, s.agent.position).unwrap();
        let ctx = DecisionContext { agent: &s.agent, peers: &[], partition: &s.partition, field: &field };
        assert_eq!(select_goal_cubso(&ctx), Some(Pos::new(0, 0)));
        let peers = [PeerInfo { id: 1, position: Pos::new(0, 1), goal: None }];
        let ctx = DecisionContext { agent: &s.agent, peers: &peers, partition: &s.partition, field: &field };
        assert_eq!(select_goal_cubso(&ctx), Some(Pos::new(0, 10)));
    }
}

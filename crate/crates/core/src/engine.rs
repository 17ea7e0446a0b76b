//! Round-based simulation loop.
//!
//! Each round runs, in order: sensing for every agent, pairwise map exchange
//! among agents in broadcast range, region merging for the same pairs, goal
//! invalidation and selection, sequential one-cell steps in ascending id
//! order, and finally the push of every private map into the central map,
//! which decides termination.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellState, Grid, Maze, MazeGenerator, Pos};
use crate::metrics::{self, RunMetadata, RunMetrics};
use crate::partition::{nearest_unexplored_region, Partition};
use crate::pathing::{wavefront, wavefront_where, DistanceField};
use crate::perception::{
    broadcast_peers, broadcast_range, exchange_maps, merge_into, AgentState, CommLedger,
    DEFAULT_BROADCAST_FRACTION, DEFAULT_VIEW_RANGE,
};
use crate::strategies::{
    frontiers, hedac_field, hedac_step, nearest_frontiers, select_goal, DecisionContext, PeerInfo,
    StrategyConfig, StrategyKind,
};
use crate::RNG_ALGORITHM;

/// Consecutive blocked rounds after which an agent plans around peers.
const DETOUR_AFTER: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulationConfig {
    pub rows: usize,
    pub cols: usize,
    pub obstacle_probability: f64,
    pub seed: u64,
    pub agent_count: usize,
    pub strategy: StrategyConfig,
    pub broadcast_fraction: f64,
    pub view_range: usize,
    /// Defaults to `50 * rows * cols`.
    pub max_rounds: Option<u64>,
    pub walk_factor: usize,
}

impl SimulationConfig {
    pub fn new(
        rows: usize,
        cols: usize,
        obstacle_probability: f64,
        agent_count: usize,
        strategy: StrategyConfig,
        seed: u64,
    ) -> Self {
        Self {
            rows,
            cols,
            obstacle_probability,
            seed,
            agent_count,
            strategy,
            broadcast_fraction: DEFAULT_BROADCAST_FRACTION,
            view_range: DEFAULT_VIEW_RANGE,
            max_rounds: None,
            walk_factor: MazeGenerator::default().walk_factor,
        }
    }

    pub fn max_rounds(&self) -> u64 {
        self.max_rounds.unwrap_or(50 * (self.rows * self.cols) as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.agent_count == 0 {
            return Err(Error::InvalidParameter("at least one agent is required".into()));
        }
        if self.max_rounds == Some(0) {
            return Err(Error::InvalidParameter("max rounds must be positive".into()));
        }
        if !(self.broadcast_fraction >= 0.0) {
            return Err(Error::InvalidParameter("broadcast fraction must be >= 0".into()));
        }
        self.strategy.validate()
    }
}

/// One line of the per-round trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoundRecord {
    pub round: u64,
    pub positions: Vec<Pos>,
    pub goals: Vec<Option<Pos>>,
    pub explored: usize,
    pub moved: Vec<bool>,
    pub step_times: Vec<f64>,
    pub exchanges: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Blocking {
    by: Option<usize>,
    rounds: u32,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimulationConfig,
    maze: Maze,
    agents: Vec<AgentState>,
    partition: Partition,
    central: Grid<CellState>,
    ledger: CommLedger,
    occupancy: Grid<Option<usize>>,
    blocking: Vec<Blocking>,
    broadcast: f64,
    round: u64,
    step_times: Vec<Vec<f64>>,
    complete: bool,
}

impl Simulation {
    /// Generates the maze from the config and places agents on random free
    /// cells drawn from the run seed.
    pub fn new(config: SimulationConfig) -> Result<Self> {
        let maze = MazeGenerator {
            walk_factor: config.walk_factor,
        }
        .generate(config.rows, config.cols, config.obstacle_probability, config.seed)?;
        Self::with_maze(config, maze)
    }

    pub fn with_maze(config: SimulationConfig, maze: Maze) -> Result<Self> {
        let positions = random_placement(&maze, config.agent_count, config.seed)?;
        Self::with_placement(config, maze, &positions)
    }

    pub fn with_placement(mut config: SimulationConfig, maze: Maze, positions: &[Pos]) -> Result<Self> {
        config.rows = maze.rows();
        config.cols = maze.cols();
        config.agent_count = positions.len();
        config.validate()?;
        let (rows, cols) = (maze.rows(), maze.cols());
        let mut occupancy = Grid::new(rows, cols, None);
        for (id, &p) in positions.iter().enumerate() {
            if !maze.is_free(p) {
                return Err(Error::InvalidParameter(format!("agent {id} placed on non-free cell {p}")));
            }
            if occupancy[p].is_some() {
                return Err(Error::DuplicatePosition(p));
            }
            occupancy[p] = Some(id);
        }
        let partition = Partition::voronoi(positions, rows, cols)?;
        let agents = positions
            .iter()
            .enumerate()
            .map(|(id, &p)| AgentState::new(id, p, rows, cols, config.view_range))
            .collect();
        Ok(Self {
            broadcast: broadcast_range(rows, cols, config.broadcast_fraction),
            blocking: vec![Blocking::default(); positions.len()],
            config,
            maze,
            agents,
            partition,
            central: Grid::new(rows, cols, CellState::Unexplored),
            ledger: CommLedger::new(rows, cols),
            occupancy,
            round: 0,
            step_times: Vec::new(),
            complete: false,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn maze(&self) -> &Maze {
        &self.maze
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn central_map(&self) -> &Grid<CellState> {
        &self.central
    }

    pub fn ledger(&self) -> &CommLedger {
        &self.ledger
    }

    pub fn rounds(&self) -> u64 {
        self.round
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Runs rounds until the central map is complete.
    pub fn run(&mut self) -> Result<RunMetrics> {
        self.run_with(|_, _| Ok(()))
    }

    /// Like [`run`](Self::run), calling `observe` after every round.
    pub fn run_with(&mut self, mut observe: impl FnMut(&Simulation, &RoundRecord) -> Result<()>) -> Result<RunMetrics> {
        let max_rounds = self.config.max_rounds();
        while !self.complete {
            if self.round >= max_rounds {
                return Err(Error::MaxRoundsExceeded {
                    max_rounds,
                    unexplored: self.central.count(CellState::Unexplored),
                });
            }
            let record = self.step_round()?;
            observe(self, &record)?;
        }
        Ok(self.metrics())
    }

    pub fn step_round(&mut self) -> Result<RoundRecord> {
        self.round += 1;
        let n = self.agents.len();
        let mut times = vec![0.0; n];

        for (agent, t) in self.agents.iter_mut().zip(times.iter_mut()) {
            let start = Instant::now();
            agent.sense(&self.maze);
            *t += start.elapsed().as_secs_f64();
        }

        let positions: Vec<Pos> = self.agents.iter().map(|a| a.position).collect();
        let pairs = broadcast_peers(&positions, self.broadcast);
        for &(i, j) in &pairs {
            let start = Instant::now();
            let (a, b) = pair_mut(&mut self.agents, i, j);
            exchange_maps(a, b, &mut self.ledger)?;
            let half = start.elapsed().as_secs_f64() / 2.0;
            times[i] += half;
            times[j] += half;
        }

        let start = Instant::now();
        self.partition.merge(&pairs);
        let mut in_range = vec![Vec::new(); n];
        for &(i, j) in &pairs {
            in_range[i].push(j);
            in_range[j].push(i);
        }
        self.swap_deadlocked_goals();
        let shared = start.elapsed().as_secs_f64() / n as f64;

        for (i, t) in times.iter_mut().enumerate() {
            let start = Instant::now();
            self.decide(i, &in_range[i])?;
            *t += start.elapsed().as_secs_f64() + shared;
        }

        let mut moved = vec![false; n];
        for i in 0..n {
            let start = Instant::now();
            moved[i] = self.step_agent(i);
            times[i] += start.elapsed().as_secs_f64();
        }
        self.check_safety()?;

        for agent in &self.agents {
            merge_into(&mut self.central, &agent.explored)?;
        }
        self.seal_enclosed_cells();
        self.complete = self.central.count(CellState::Unexplored) == 0;

        self.step_times.push(times.clone());
        Ok(RoundRecord {
            round: self.round,
            positions: self.agents.iter().map(|a| a.position).collect(),
            goals: self.agents.iter().map(|a| a.goal).collect(),
            explored: self.central.known_count(),
            moved,
            step_times: times,
            exchanges: pairs.len() as u64,
        })
    }

    /// Two agents blocking each other head-on trade goals when they share a
    /// region; each goal then lies behind its new owner.
    fn swap_deadlocked_goals(&mut self) {
        if !self.config.strategy.kind.is_frontier_based() {
            return;
        }
        for i in 0..self.agents.len() {
            let Some(j) = self.blocking[i].by else { continue };
            if j <= i || self.blocking[j].by != Some(i) {
                continue;
            }
            if self.partition.region_of_agent(i) != self.partition.region_of_agent(j) {
                continue;
            }
            let (a, b) = pair_mut(&mut self.agents, i, j);
            if a.goal.is_some() && b.goal.is_some() {
                std::mem::swap(&mut a.goal, &mut b.goal);
                self.blocking[i] = Blocking::default();
                self.blocking[j] = Blocking::default();
            }
        }
    }

    fn peers_of(&self, in_range: &[usize]) -> Vec<PeerInfo> {
        in_range
            .iter()
            .map(|&j| PeerInfo {
                id: j,
                position: self.agents[j].position,
                goal: self.agents[j].goal,
            })
            .collect()
    }

    /// Reassigns agent `i` to the region of the nearest cell unexplored in
    /// both the central map and its own map. Returns whether it moved.
    fn reassign_region(&mut self, i: usize) -> Result<bool> {
        let mut knowledge = self.central.clone();
        merge_into(&mut knowledge, &self.agents[i].explored)?;
        match nearest_unexplored_region(self.agents[i].position, &self.partition, &knowledge) {
            Some(region) if region != self.partition.region_of_agent(i) => {
                self.partition.reassign(i, region)?;
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn decide(&mut self, i: usize, in_range: &[usize]) -> Result<()> {
        let peers = self.peers_of(in_range);
        let field = wavefront(&self.agents[i].explored, self.agents[i].position)?;
        let strategy = self.config.strategy.clone();

        if strategy.kind == StrategyKind::Hedac {
            let has_frontier = !nearest_frontiers(&self.context(i, &peers, &field)).is_empty();
            if !has_frontier {
                self.reassign_region(i)?;
            }
            let ctx = self.context(i, &peers, &field);
            let heat = hedac_field(ctx.agent, &peers, &self.partition, &strategy);
            let next = hedac_step(&ctx, &heat, &strategy);
            let agent = &mut self.agents[i];
            agent.goal = None;
            agent.path = next.into_iter().collect();
            return Ok(());
        }

        if let Some(goal) = self.agents[i].goal {
            if !self.goal_still_valid(i, goal, &peers, &field) {
                self.agents[i].goal = None;
            }
        }
        if self.agents[i].goal.is_none() {
            let mut goal = select_goal(&self.context(i, &peers, &field), &strategy);
            if goal.is_none() && self.reassign_region(i)? {
                goal = select_goal(&self.context(i, &peers, &field), &strategy);
            }
            self.agents[i].goal = goal;
        }

        let agent = &self.agents[i];
        let path = match agent.goal {
            Some(goal) => {
                if !self.partition.contains(i, goal) || agent.explored[goal] != CellState::Unexplored {
                    return Err(Error::Invariant(format!("agent {i} holds goal {goal} outside its open region")));
                }
                let blocked = self.blocking[i];
                let detour = (blocked.rounds >= DETOUR_AFTER)
                    .then(|| self.detour_path(i, goal, &peers))
                    .flatten();
                match detour {
                    Some(path) => path,
                    None => field.extract_path(goal)?,
                }
            }
            None => Vec::new(),
        };
        self.agents[i].path = path;
        Ok(())
    }

    /// Path to `goal` treating cells of in-range peers as walls.
    fn detour_path(&self, i: usize, goal: Pos, peers: &[PeerInfo]) -> Option<Vec<Pos>> {
        let agent = &self.agents[i];
        let map = &agent.explored;
        let field = wavefront_where(map.rows(), map.cols(), agent.position, |p| {
            map[p] != CellState::Obstacle && peers.iter().all(|q| q.position != p)
        });
        field.extract_path(goal).ok()
    }

    fn goal_still_valid(&self, i: usize, goal: Pos, peers: &[PeerInfo], field: &DistanceField) -> bool {
        let agent = &self.agents[i];
        if agent.explored[goal] != CellState::Unexplored
            || !self.partition.contains(i, goal)
            || !field.is_reachable(goal)
        {
            return false;
        }
        if self.config.strategy.kind == StrategyKind::Culvp {
            // a lower-id peer already holding the same goal keeps it
            let duplicate = peers.iter().any(|p| p.id < i && p.goal == Some(goal));
            if duplicate {
                let region = self.partition.region_of_agent(i);
                let sharing = peers
                    .iter()
                    .filter(|p| self.partition.region_of_agent(p.id) == region)
                    .count();
                let open = frontiers(&self.context(i, peers, field)).len();
                if open > sharing {
                    return false;
                }
            }
        }
        true
    }

    fn context<'a>(&'a self, i: usize, peers: &'a [PeerInfo], field: &'a DistanceField) -> DecisionContext<'a> {
        DecisionContext {
            agent: &self.agents[i],
            peers,
            partition: &self.partition,
            field,
        }
    }

    /// Moves agent `i` one cell along its path if the cell is free and
    /// unoccupied. Returns whether it moved.
    fn step_agent(&mut self, i: usize) -> bool {
        let agent = &self.agents[i];
        let Some(&next) = agent.path.first() else {
            self.blocking[i] = Blocking::default();
            return false;
        };
        if self.maze.is_obstacle(next) || agent.explored[next] == CellState::Obstacle {
            self.agents[i].path.clear();
            self.blocking[i] = Blocking::default();
            return false;
        }
        if let Some(other) = self.occupancy[next] {
            let b = &mut self.blocking[i];
            b.rounds = if b.by == Some(other) { b.rounds + 1 } else { 1 };
            b.by = Some(other);
            return false;
        }
        let agent = &mut self.agents[i];
        self.occupancy[agent.position] = None;
        self.occupancy[next] = Some(i);
        agent.position = next;
        agent.path.remove(0);
        agent.distance_traveled += 1;
        self.blocking[i] = Blocking::default();
        true
    }

    /// Every agent on its own free cell; occupancy markers agree.
    pub fn check_safety(&self) -> Result<()> {
        let mut seen = Grid::new(self.maze.rows(), self.maze.cols(), false);
        for agent in &self.agents {
            let p = agent.position;
            if !self.maze.is_free(p) {
                return Err(Error::Invariant(format!("agent {} stands on obstacle {p}", agent.id)));
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::Invariant(format!("two agents share cell {p}")));
            }
            if self.occupancy[p] != Some(agent.id) {
                return Err(Error::Invariant(format!("occupancy marker out of sync at {p}")));
            }
        }
        Ok(())
    }

    /// Free space is connected, so any unexplored cell that no agent can
    /// reach through non-obstacle cells of the central map must itself be
    /// an obstacle.
    fn seal_enclosed_cells(&mut self) {
        let (rows, cols) = (self.central.rows(), self.central.cols());
        let mut reached = Grid::new(rows, cols, false);
        for agent in &self.agents {
            if reached[agent.position] {
                continue;
            }
            let field = wavefront_where(rows, cols, agent.position, |p| {
                self.central[p] != CellState::Obstacle
            });
            for (p, d) in field.dist.iter() {
                if d.is_some() {
                    reached[p] = true;
                }
            }
        }
        for p in self.central.positions().collect::<Vec<_>>() {
            if self.central[p] == CellState::Unexplored && !reached[p] {
                self.central[p] = CellState::Obstacle;
            }
        }
    }

    pub fn metrics(&self) -> RunMetrics {
        let explored = self.central.known_count();
        let cost = metrics::exploration_cost(&self.agents);
        RunMetrics {
            exploration_time: metrics::exploration_time(&self.step_times, self.agents.len(), self.round),
            rounds: self.round,
            exploration_cost: cost,
            exploration_efficiency: metrics::exploration_efficiency(explored, cost).ok(),
            map_quality: metrics::map_quality(&self.central, &self.maze),
            comm_cost: metrics::comm_cost(&self.ledger),
            explored,
            exchanges: self.ledger.exchanges,
            metadata: RunMetadata {
                method: self.config.strategy.label(),
                rows: self.maze.rows(),
                cols: self.maze.cols(),
                obstacle_probability: self.config.obstacle_probability,
                agents: self.agents.len(),
                seed: self.config.seed,
                rng: RNG_ALGORITHM.to_string(),
                maze_hash: self.maze.content_hash(),
            },
        }
    }
}

/// Generates the maze, places agents and runs to completion.
pub fn run_simulation(config: SimulationConfig) -> Result<RunMetrics> {
    Simulation::new(config)?.run()
}

/// Distinct uniformly random free cells; agent `k` gets the `k`-th draw.
pub fn random_placement(maze: &Maze, agents: usize, seed: u64) -> Result<Vec<Pos>> {
    let free = maze.free_cells();
    if free.len() < agents {
        return Err(Error::NotEnoughFreeCells {
            free: free.len(),
            agents,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    Ok(rand::seq::index::sample(&mut rng, free.len(), agents)
        .into_iter()
        .map(|k| free[k])
        .collect())
}

fn pair_mut<T>(items: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert!(i < j);
    let (left, right) = items.split_at_mut(j);
    (&mut left[i], &mut right[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_maze(rows: usize, cols: usize) -> Maze {
        Maze::from_cells(Grid::new(rows, cols, CellState::Free), 0.0, 0).unwrap()
    }

    fn config(kind: StrategyKind, agents: usize) -> SimulationConfig {
        SimulationConfig::new(30, 30, 0.85, agents, StrategyConfig::new(kind), 11)
    }

    #[test]
    fn single_agent_covers_small_open_maze() {
        for kind in StrategyKind::ALL {
            let mut sim = Simulation::with_placement(config(kind, 1), open_maze(5, 5), &[Pos::new(0, 0)]).unwrap();
            let m = sim.run().unwrap();
            assert_eq!(m.explored, 25, "{kind}");
            assert_eq!(m.map_quality, 1.0);
            assert_eq!(m.comm_cost, 0);
        }
    }

    #[test]
    fn placement_is_random_but_reproducible() {
        let maze = open_maze(10, 10);
        let a = random_placement(&maze, 5, 3).unwrap();
        assert_eq!(a, random_placement(&maze, 5, 3).unwrap());
        let mut sorted = a.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 5);
        assert!(random_placement(&maze, 101, 3).is_err());
    }

    #[test]
    fn blocked_step_keeps_agent_in_place() {
        let maze = open_maze(1 + 2, 5);
        let mut sim = Simulation::with_placement(
            config(StrategyKind::Nearest, 2),
            maze,
            &[Pos::new(1, 0), Pos::new(1, 1)],
        )
        .unwrap();
        sim.agents[0].path = vec![Pos::new(1, 1)];
        assert!(!sim.step_agent(0));
        assert_eq!(sim.agents[0].position, Pos::new(1, 0));
        assert_eq!(sim.agents[0].distance_traveled, 0);
        assert_eq!(sim.blocking[0].by, Some(1));

        sim.agents[0].path = vec![Pos::new(0, 0)];
        assert!(sim.step_agent(0));
        assert_eq!(sim.agents[0].position, Pos::new(0, 0));
        assert_eq!(sim.agents[0].distance_traveled, 1);
        assert_eq!(sim.occupancy[Pos::new(1, 0)], None);
        assert_eq!(sim.occupancy[Pos::new(0, 0)], Some(0));
    }

    #[test]
    fn obstacle_on_path_stops_and_clears_plan() {
        let mut cells = Grid::new(3, 3, CellState::Free);
        cells[Pos::new(1, 1)] = CellState::Obstacle;
        let maze = Maze::from_cells(cells, 0.0, 0).unwrap();
        let mut sim = Simulation::with_placement(config(StrategyKind::Nearest, 1), maze, &[Pos::new(1, 0)]).unwrap();
        // optimistic plan straight through the unseen wall
        sim.agents[0].path = vec![Pos::new(1, 1), Pos::new(1, 2)];
        assert!(!sim.step_agent(0));
        assert!(sim.agents[0].path.is_empty());
        assert_eq!(sim.agents[0].position, Pos::new(1, 0));
    }

    #[test]
    fn sealing_marks_unreachable_unknowns_as_obstacles() {
        // the centre of a solid 3x3 block can never be seen
        let mut cells = Grid::new(7, 7, CellState::Free);
        for r in 2..5 {
            for c in 2..5 {
                cells[Pos::new(r, c)] = CellState::Obstacle;
            }
        }
        let maze = Maze::from_cells(cells, 0.0, 0).unwrap();
        let mut sim = Simulation::with_placement(config(StrategyKind::Nearest, 1), maze, &[Pos::new(0, 0)]).unwrap();
        let m = sim.run().unwrap();
        assert_eq!(m.map_quality, 1.0);
        assert!(sim.agents[0].explored[Pos::new(3, 3)] == CellState::Unexplored);
        assert_eq!(sim.central_map()[Pos::new(3, 3)], CellState::Obstacle);
    }

    #[test]
    fn max_rounds_is_an_error() {
        let mut cfg = config(StrategyKind::Culvp, 1);
        cfg.max_rounds = Some(2);
        let mut sim = Simulation::with_placement(cfg, open_maze(20, 20), &[Pos::new(0, 0)]).unwrap();
        assert!(matches!(sim.run(), Err(Error::MaxRoundsExceeded { max_rounds: 2, .. })));
        assert_eq!(sim.rounds(), 2);
    }
}

//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use mazeswarm::experiments::ResultRow;
use mazeswarm::grid::{CellState, Grid, Pos};
use mazeswarm::partition::Partition;
use mazeswarm::perception::AgentState;
use mazeswarm::strategies::{HedacProblem, PeerInfo};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Random known map: each cell Obstacle, Free or Unexplored.
pub fn random_map(rng: &mut impl Rng, rows: usize, cols: usize, p_obstacle: f64, p_free: f64) -> Grid<CellState> {
    let mut map = Grid::new(rows, cols, CellState::Unexplored);
    for p in map.positions().collect::<Vec<_>>() {
        let x: f64 = rng.gen();
        map[p] = if x < p_obstacle {
            CellState::Obstacle
        } else if x < p_obstacle + p_free {
            CellState::Free
        } else {
            CellState::Unexplored
        };
    }
    map
}

/// Distinct random cells of the map, each cleared to Free.
pub fn place(rng: &mut impl Rng, map: &mut Grid<CellState>, count: usize) -> Vec<Pos> {
    let mut out = Vec::new();
    while out.len() < count {
        let p = Pos::new(rng.gen_range(0..map.rows()), rng.gen_range(0..map.cols()));
        if !out.contains(&p) {
            map[p] = CellState::Free;
            out.push(p);
        }
    }
    out
}

fn neighbours(rows: usize, cols: usize, p: Pos) -> Vec<Pos> {
    let mut out = Vec::with_capacity(4);
    if p.row > 0 {
        out.push(Pos::new(p.row - 1, p.col));
    }
    if p.row + 1 < rows {
        out.push(Pos::new(p.row + 1, p.col));
    }
    if p.col > 0 {
        out.push(Pos::new(p.row, p.col - 1));
    }
    if p.col + 1 < cols {
        out.push(Pos::new(p.row, p.col + 1));
    }
    out
}

/// Unit-weight Dijkstra over non-obstacle cells.
pub fn dijkstra(map: &Grid<CellState>, source: Pos) -> Grid<Option<u32>> {
    let mut dist: Grid<Option<u32>> = Grid::new(map.rows(), map.cols(), None);
    let mut heap = BinaryHeap::new();
    dist[source] = Some(0);
    heap.push(Reverse((0u32, source)));
    while let Some(Reverse((d, p))) = heap.pop() {
        if dist[p].is_some_and(|best| best < d) {
            continue;
        }
        for n in neighbours(map.rows(), map.cols(), p) {
            if map[n] == CellState::Obstacle {
                continue;
            }
            if dist[n].is_none_or(|old| d + 1 < old) {
                dist[n] = Some(d + 1);
                heap.push(Reverse((d + 1, n)));
            }
        }
    }
    dist
}

/// Backtracks from `target` to the source, preferring N, S, W, E.
pub fn backtrack(dist: &Grid<Option<u32>>, target: Pos) -> Vec<Pos> {
    let mut d = dist[target].expect("reachable target");
    let mut cur = target;
    let mut path = vec![];
    while d > 0 {
        path.push(cur);
        cur = neighbours(dist.rows(), dist.cols(), cur)
            .into_iter()
            .find(|&n| dist[n] == Some(d - 1))
            .expect("predecessor");
        d -= 1;
    }
    path.reverse();
    path
}

pub fn unexplored_around(map: &Grid<CellState>, at: Pos, radius: usize) -> usize {
    let mut n = 0;
    for r in at.row.saturating_sub(radius)..=(at.row + radius).min(map.rows() - 1) {
        for c in at.col.saturating_sub(radius)..=(at.col + radius).min(map.cols() - 1) {
            if map[Pos::new(r, c)] == CellState::Unexplored {
                n += 1;
            }
        }
    }
    n
}

fn normalise(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        vec![1.0; v.len()]
    } else {
        v.iter().map(|x| (x - lo) / (hi - lo)).collect()
    }
}

/// Exhaustive evaluation of the CU-LVP utility over the tied-nearest
/// frontiers, including the peer-goal exclusion rule.
pub fn culvp_oracle(agent: &AgentState, peers: &[PeerInfo], partition: &Partition, lambda: f64) -> Option<Pos> {
    let map = &agent.explored;
    let dist = dijkstra(map, agent.position);
    let region = partition.region_of_agent(agent.id);
    let mut all = vec![];
    for r in 0..map.rows() {
        for c in 0..map.cols() {
            let p = Pos::new(r, c);
            if partition.region_at(p) == region && map[p] == CellState::Unexplored && dist[p].is_some() {
                all.push(p);
            }
        }
    }
    let sharing = peers.iter().filter(|q| partition.region_of_agent(q.id) == region).count();
    let claimed: BTreeSet<Pos> = peers.iter().filter_map(|q| q.goal).collect();
    let mut pool = all.clone();
    if all.len() >= sharing + 1 {
        let open: Vec<Pos> = all.iter().copied().filter(|p| !claimed.contains(p)).collect();
        if !open.is_empty() {
            pool = open;
        }
    }
    let best = pool.iter().map(|&p| dist[p].unwrap()).min()?;
    let tied: Vec<Pos> = pool.into_iter().filter(|&p| dist[p] == Some(best)).collect();
    let mnm: Vec<f64> = tied
        .iter()
        .map(|&f| {
            let (fr, fc) = (f.row as f64, f.col as f64);
            std::iter::once(agent.position)
                .chain(peers.iter().map(|q| q.position))
                .map(|q| ((fr - q.row as f64).powi(2) + (fc - q.col as f64).powi(2)).sqrt())
                .sum()
        })
        .collect();
    let jgr: Vec<f64> = tied
        .iter()
        .map(|&f| {
            backtrack(&dist, f)
                .iter()
                .map(|&x| unexplored_around(map, x, agent.view_range) as f64)
                .sum()
        })
        .collect();
    let (nm, nj) = (normalise(&mnm), normalise(&jgr));
    let mut winner = 0;
    for i in 1..tied.len() {
        if nm[i] + lambda * nj[i] > nm[winner] + lambda * nj[winner] {
            winner = i;
        }
    }
    Some(tied[winner])
}

/// A deciding agent plus peers and partition drawn at random.
pub struct Scenario {
    pub agent: AgentState,
    pub peers: Vec<PeerInfo>,
    pub partition: Partition,
}

pub fn random_scenario(rng: &mut impl Rng, n: usize, agents: usize, p_obstacle: f64, merge: bool) -> Scenario {
    let mut map = random_map(rng, n, n, p_obstacle, 0.35);
    let positions = place(rng, &mut map, agents);
    let mut partition = Partition::voronoi(&positions, n, n).unwrap();
    if merge && agents > 1 && rng.gen_bool(0.5) {
        let j = rng.gen_range(1..agents);
        partition.merge(&[(0, j)]);
    }
    let me = rng.gen_range(0..agents);
    let unexplored: Vec<Pos> = map.positions().filter(|&p| map[p] == CellState::Unexplored).collect();
    let peers = (0..agents)
        .filter(|&j| j != me)
        .map(|j| PeerInfo {
            id: j,
            position: positions[j],
            goal: (!unexplored.is_empty() && rng.gen_bool(0.5))
                .then(|| unexplored[rng.gen_range(0..unexplored.len())]),
        })
        .collect();
    let mut agent = AgentState::new(me, positions[me], n, n, 2);
    agent.explored = map;
    Scenario { agent, peers, partition }
}

/// The HEDAC update as a dense affine map `u -> M u + c`.
pub fn hedac_affine(problem: &HedacProblem) -> (DMatrix<f64>, DVector<f64>) {
    let (rows, cols) = (problem.rows, problem.cols);
    let m = rows * cols;
    let mut mat = DMatrix::zeros(m, m);
    let mut c = DVector::zeros(m);
    for i in 0..m {
        if !problem.active[i] {
            continue;
        }
        c[i] = problem.source[i] / 4.0;
        for n in neighbours(rows, cols, Pos::new(i / cols, i % cols)) {
            mat[(i, n.row * cols + n.col)] = 0.25;
        }
    }
    (mat, c)
}

/// Fixed point of the HEDAC update by a direct dense solve.
pub fn hedac_fixed_point(problem: &HedacProblem) -> DVector<f64> {
    let (mat, c) = hedac_affine(problem);
    let m = mat.nrows();
    // clamped rows of `mat` are empty, so they read u = 0
    let system = DMatrix::identity(m, m) - mat;
    system.lu().solve(&c).expect("diagonally dominant system")
}

/// `iterations` dense Jacobi steps from zero.
pub fn hedac_dense_iterate(problem: &HedacProblem, iterations: usize) -> DVector<f64> {
    let (mat, c) = hedac_affine(problem);
    let mut u = DVector::zeros(c.len());
    for _ in 0..iterations {
        u = &mat * &u + &c;
    }
    u
}

/// Segment between two cell centres against each closed cell square, in
/// exact arithmetic on doubled coordinates.
pub fn touched_cells(from: Pos, to: Pos, rows: usize, cols: usize) -> BTreeSet<Pos> {
    let (y0, x0) = (2 * from.row as i64, 2 * from.col as i64);
    let (dy, dx) = (2 * to.row as i64 - y0, 2 * to.col as i64 - x0);
    let mut out = BTreeSet::new();
    for r in 0..rows {
        for c in 0..cols {
            // t-interval as fractions (num, den) with den > 0
            let mut lo = (0i64, 1i64);
            let mut hi = (1i64, 1i64);
            let mut empty = false;
            for (p0, d, centre) in [(y0, dy, 2 * r as i64), (x0, dx, 2 * c as i64)] {
                let (min, max) = (centre - 1, centre + 1);
                if d == 0 {
                    if p0 < min || p0 > max {
                        empty = true;
                    }
                    continue;
                }
                let (mut a, mut b) = ((min - p0, d), (max - p0, d));
                if d < 0 {
                    a = (-a.0, -a.1);
                    b = (-b.0, -b.1);
                    std::mem::swap(&mut a, &mut b);
                }
                if a.0 * lo.1 > lo.0 * a.1 {
                    lo = a;
                }
                if b.0 * hi.1 < hi.0 * b.1 {
                    hi = b;
                }
            }
            if !empty && lo.0 * hi.1 <= hi.0 * lo.1 {
                out.insert(Pos::new(r, c));
            }
        }
    }
    out
}

/// Minimal successful row for ranking tests.
pub fn row(method: &str, agents: usize, values: [f64; 6]) -> ResultRow {
    ResultRow {
        method: method.into(),
        rows: 30,
        cols: 30,
        obstacle_prob: 0.85,
        agents,
        seed: 0,
        time_s: values[0],
        rounds: values[1] as u64,
        cost: values[2] as u64,
        efficiency: Some(values[3]),
        map_quality: values[4],
        comm_bits: values[5] as u64,
        rep: 0,
        maze_hash: String::new(),
        status: "ok".into(),
    }
}

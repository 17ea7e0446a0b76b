//! Voronoi task partitioning, region merging and reassignment.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::grid::{CellState, Grid, Pos};
use crate::pathing::wavefront_where;

pub type RegionId = usize;

/// Cell-to-region assignment plus region membership of agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    region_of: Grid<RegionId>,
    members: BTreeMap<RegionId, BTreeSet<usize>>,
    cells_of: BTreeMap<RegionId, BTreeSet<Pos>>,
    agent_region: Vec<RegionId>,
}

impl Partition {
    /// Nearest-site assignment over the whole grid, ignoring obstacles.
    /// Distances are Euclidean; ties go to the lowest agent id. Region ids
    /// start out equal to agent ids.
    pub fn voronoi(positions: &[Pos], rows: usize, cols: usize) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidParameter("partition needs at least one agent".into()));
        }
        let mut seen = BTreeSet::new();
        for &p in positions {
            if p.row >= rows || p.col >= cols {
                return Err(Error::InvalidParameter(format!("agent position {p} out of bounds")));
            }
            if !seen.insert(p) {
                return Err(Error::DuplicatePosition(p));
            }
        }

        let mut region_of = Grid::new(rows, cols, 0);
        let mut cells_of: BTreeMap<RegionId, BTreeSet<Pos>> =
            (0..positions.len()).map(|i| (i, BTreeSet::new())).collect();
        for cell in region_of.positions().collect::<Vec<_>>() {
            let nearest = positions
                .iter()
                .enumerate()
                .min_by_key(|(i, p)| (cell.squared_distance(**p), *i))
                .map(|(i, _)| i)
                .expect("non-empty");
            region_of[cell] = nearest;
            cells_of.get_mut(&nearest).expect("seeded").insert(cell);
        }
        let members = (0..positions.len()).map(|i| (i, BTreeSet::from([i]))).collect();
        Ok(Self {
            region_of,
            members,
            cells_of,
            agent_region: (0..positions.len()).collect(),
        })
    }

    pub fn region_at(&self, cell: Pos) -> RegionId {
        self.region_of[cell]
    }

    pub fn region_of_agent(&self, agent: usize) -> RegionId {
        self.agent_region[agent]
    }

    pub fn contains(&self, agent: usize, cell: Pos) -> bool {
        self.region_of[cell] == self.agent_region[agent]
    }

    pub fn cells(&self, region: RegionId) -> impl Iterator<Item = Pos> + '_ {
        self.cells_of.get(&region).into_iter().flatten().copied()
    }

    pub fn region_size(&self, region: RegionId) -> usize {
        self.cells_of.get(&region).map_or(0, BTreeSet::len)
    }

    pub fn members(&self, region: RegionId) -> impl Iterator<Item = usize> + '_ {
        self.members.get(&region).into_iter().flatten().copied()
    }

    pub fn region_ids(&self) -> impl Iterator<Item = RegionId> + '_ {
        self.cells_of.keys().copied()
    }

    pub fn region_count(&self) -> usize {
        self.cells_of.len()
    }

    pub fn agent_count(&self) -> usize {
        self.agent_region.len()
    }

    pub fn region_grid(&self) -> &Grid<RegionId> {
        &self.region_of
    }

    /// Unions the regions of every connected component of the contact graph
    /// given by `pairs`. The surviving region keeps the smallest id.
    pub fn merge(&mut self, pairs: &[(usize, usize)]) {
        let n = self.agent_region.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut root = x;
            while parent[root] != root {
                root = parent[root];
            }
            let mut cur = x;
            while parent[cur] != root {
                cur = std::mem::replace(&mut parent[cur], root);
            }
            root
        }
        for &(a, b) in pairs {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut components: BTreeMap<usize, BTreeSet<RegionId>> = BTreeMap::new();
        for agent in 0..n {
            let root = find(&mut parent, agent);
            components.entry(root).or_default().insert(self.agent_region[agent]);
        }
        for regions in components.into_values() {
            let mut ids = regions.into_iter();
            let Some(keep) = ids.next() else { continue };
            for absorbed in ids {
                self.absorb(keep, absorbed);
            }
        }
    }

    fn absorb(&mut self, keep: RegionId, absorbed: RegionId) {
        if keep == absorbed {
            return;
        }
        if let Some(cells) = self.cells_of.remove(&absorbed) {
            for &c in &cells {
                self.region_of[c] = keep;
            }
            self.cells_of.entry(keep).or_default().extend(cells);
        }
        if let Some(agents) = self.members.remove(&absorbed) {
            for &a in &agents {
                self.agent_region[a] = keep;
            }
            self.members.entry(keep).or_default().extend(agents);
        }
    }

    /// Moves an agent into another existing region.
    pub fn reassign(&mut self, agent: usize, region: RegionId) -> Result<()> {
        if !self.cells_of.contains_key(&region) {
            return Err(Error::InvalidParameter(format!("unknown region {region}")));
        }
        let old = self.agent_region[agent];
        if let Some(set) = self.members.get_mut(&old) {
            set.remove(&agent);
            if set.is_empty() {
                self.members.remove(&old);
            }
        }
        self.members.entry(region).or_default().insert(agent);
        self.agent_region[agent] = region;
        Ok(())
    }

    /// Checks totality and the consistency of the three lookup structures.
    pub fn check_consistency(&self) -> Result<()> {
        let total: usize = self.cells_of.values().map(BTreeSet::len).sum();
        if total != self.region_of.len() {
            return Err(Error::Invariant(format!(
                "regions cover {total} cells, grid has {}",
                self.region_of.len()
            )));
        }
        for (region, cells) in &self.cells_of {
            if let Some(c) = cells.iter().find(|&&c| self.region_of[c] != *region) {
                return Err(Error::Invariant(format!("cell {c} listed under wrong region")));
            }
        }
        for (agent, &region) in self.agent_region.iter().enumerate() {
            let listed = self.members.get(&region).is_some_and(|m| m.contains(&agent));
            let elsewhere = self
                .members
                .iter()
                .filter(|(r, m)| **r != region && m.contains(&agent))
                .count();
            if !listed || elsewhere > 0 {
                return Err(Error::Invariant(format!("agent {agent} membership inconsistent")));
            }
        }
        Ok(())
    }
}

/// Region holding the unexplored cell closest (by wavefront distance over
/// `knowledge`) to `from`. Ties go to the row-major first cell. `None` when
/// no unexplored cell is reachable.
pub fn nearest_unexplored_region(
    from: Pos,
    partition: &Partition,
    knowledge: &Grid<CellState>,
) -> Option<RegionId> {
    let field = wavefront_where(knowledge.rows(), knowledge.cols(), from, |p| {
        knowledge[p] != CellState::Obstacle
    });
    knowledge
        .iter()
        .filter(|(_, &c)| c == CellState::Unexplored)
        .filter_map(|(p, _)| field.get(p).map(|d| (d, p)))
        .min()
        .map(|(_, p)| partition.region_at(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_agent_owns_everything() {
        let p = Partition::voronoi(&[Pos::new(2, 2)], 5, 6).unwrap();
        assert_eq!(p.region_size(0), 30);
        assert_eq!(p.region_count(), 1);
        p.check_consistency().unwrap();
    }

    #[test]
    fn strip_splits_at_midpoint() {
        let p = Partition::voronoi(&[Pos::new(0, 0), Pos::new(0, 9)], 1, 10).unwrap();
        for c in 0..10 {
            assert_eq!(p.region_at(Pos::new(0, c)), usize::from(c >= 5), "col {c}");
        }
    }

    #[test]
    fn exact_ties_go_to_lower_id() {
        let p = Partition::voronoi(&[Pos::new(0, 4), Pos::new(0, 0)], 1, 5).unwrap();
        assert_eq!(p.region_at(Pos::new(0, 2)), 0);
    }

    #[test]
    fn duplicate_positions_rejected() {
        assert!(matches!(
            Partition::voronoi(&[Pos::new(1, 1), Pos::new(1, 1)], 3, 3),
            Err(Error::DuplicatePosition(_))
        ));
    }

    #[test]
    fn merge_is_transitive_and_idempotent() {
        let sites = [Pos::new(0, 0), Pos::new(0, 5), Pos::new(0, 10), Pos::new(9, 9)];
        let mut p = Partition::voronoi(&sites, 10, 11).unwrap();
        p.merge(&[(0, 1), (1, 2)]);
        assert_eq!(p.region_of_agent(0), 0);
        assert_eq!(p.region_of_agent(1), 0);
        assert_eq!(p.region_of_agent(2), 0);
        assert_eq!(p.region_of_agent(3), 3);
        assert_eq!(p.region_count(), 2);
        p.check_consistency().unwrap();
        let before = p.clone();
        p.merge(&[(0, 2)]);
        assert_eq!(p, before);
    }

    #[test]
    fn reassignment_keeps_cells() {
        let mut p = Partition::voronoi(&[Pos::new(0, 0), Pos::new(4, 4)], 5, 5).unwrap();
        p.reassign(0, 1).unwrap();
        assert_eq!(p.region_of_agent(0), 1);
        assert_eq!(p.members(1).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(p.region_count(), 2);
        p.check_consistency().unwrap();
        // merging after reassignment pulls the empty region in too only via members
        p.merge(&[(0, 1)]);
        assert_eq!(p.region_count(), 2);
    }

    #[test]
    fn nearest_unexplored_region_picks_closest_cell() {
        let p = Partition::voronoi(&[Pos::new(0, 0), Pos::new(0, 9)], 1, 10).unwrap();
        let mut known = Grid::new(1, 10, CellState::Free);
        assert_eq!(nearest_unexplored_region(Pos::new(0, 3), &p, &known), None);
        known[Pos::new(0, 7)] = CellState::Unexplored;
        assert_eq!(nearest_unexplored_region(Pos::new(0, 3), &p, &known), Some(1));
        known[Pos::new(0, 0)] = CellState::Unexplored;
        // distance 3 to col 0 beats distance 4 to col 7
        assert_eq!(nearest_unexplored_region(Pos::new(0, 3), &p, &known), Some(0));
    }
}

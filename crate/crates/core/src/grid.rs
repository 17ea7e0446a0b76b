//! Cell alphabet, dense grids and the ground-truth maze generator.

use std::collections::VecDeque;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// State of a single maze cell, with the canonical integer encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum CellState {
    Unexplored,
    Free,
    Obstacle,
    AgentOccupied,
}

impl CellState {
    pub const fn code(self) -> i8 {
        match self {
            CellState::Unexplored => -1,
            CellState::Free => 0,
            CellState::Obstacle => 1,
            CellState::AgentOccupied => 2,
        }
    }

    pub fn is_known(self) -> bool {
        self != CellState::Unexplored
    }
}

impl From<CellState> for i8 {
    fn from(state: CellState) -> i8 {
        state.code()
    }
}

impl TryFrom<i8> for CellState {
    type Error = String;

    fn try_from(code: i8) -> Result<Self, String> {
        match code {
            -1 => Ok(CellState::Unexplored),
            0 => Ok(CellState::Free),
            1 => Ok(CellState::Obstacle),
            2 => Ok(CellState::AgentOccupied),
            other => Err(format!("invalid cell code {other}")),
        }
    }
}

/// A cell coordinate. The derived ordering is row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub row: usize,
    pub col: usize,
}

impl Pos {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn manhattan(self, other: Pos) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    pub fn chebyshev(self, other: Pos) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }

    pub fn euclidean(self, other: Pos) -> f64 {
        (self.squared_distance(other) as f64).sqrt()
    }

    pub fn squared_distance(self, other: Pos) -> u64 {
        let dr = self.row.abs_diff(other.row) as u64;
        let dc = self.col.abs_diff(other.col) as u64;
        dr * dr + dc * dc
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Dense row-major 2D array.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn new(rows: usize, cols: usize, fill: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![fill; rows * cols],
        }
    }

    pub fn fill(&mut self, value: T) {
        self.data.fill(value);
    }
}

impl<T> Grid<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "grid data has {} cells, expected {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn in_bounds(&self, pos: Pos) -> bool {
        pos.row < self.rows && pos.col < self.cols
    }

    pub fn get(&self, pos: Pos) -> Option<&T> {
        self.in_bounds(pos).then(|| &self.data[pos.row * self.cols + pos.col])
    }

    pub fn index_of(&self, pos: Pos) -> usize {
        pos.row * self.cols + pos.col
    }

    pub fn pos_of(&self, index: usize) -> Pos {
        Pos::new(index / self.cols, index % self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pos, &T)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| (Pos::new(i / cols, i % cols), v))
    }

    /// All coordinates in row-major order.
    pub fn positions(&self) -> impl Iterator<Item = Pos> {
        let cols = self.cols;
        (0..self.rows * self.cols).map(move |i| Pos::new(i / cols, i % cols))
    }

    /// In-bounds orthogonal neighbours in the fixed order north, south, west, east.
    pub fn neighbors4(&self, pos: Pos) -> impl Iterator<Item = Pos> {
        let (rows, cols) = (self.rows, self.cols);
        let north = (pos.row > 0).then(|| Pos::new(pos.row - 1, pos.col));
        let south = (pos.row + 1 < rows).then(|| Pos::new(pos.row + 1, pos.col));
        let west = (pos.col > 0).then(|| Pos::new(pos.row, pos.col - 1));
        let east = (pos.col + 1 < cols).then(|| Pos::new(pos.row, pos.col + 1));
        [north, south, west, east].into_iter().flatten()
    }

    /// In-bounds cells within Chebyshev distance `radius` of `center`, row-major.
    pub fn window(&self, center: Pos, radius: usize) -> impl Iterator<Item = Pos> {
        let r0 = center.row.saturating_sub(radius);
        let r1 = (center.row + radius).min(self.rows.saturating_sub(1));
        let c0 = center.col.saturating_sub(radius);
        let c1 = (center.col + radius).min(self.cols.saturating_sub(1));
        (r0..=r1).flat_map(move |r| (c0..=c1).map(move |c| Pos::new(r, c)))
    }
}

impl<T> Index<Pos> for Grid<T> {
    type Output = T;

    fn index(&self, pos: Pos) -> &T {
        assert!(self.in_bounds(pos), "{pos} out of bounds");
        &self.data[pos.row * self.cols + pos.col]
    }
}

impl<T> IndexMut<Pos> for Grid<T> {
    fn index_mut(&mut self, pos: Pos) -> &mut T {
        assert!(self.in_bounds(pos), "{pos} out of bounds");
        &mut self.data[pos.row * self.cols + pos.col]
    }
}

impl Grid<CellState> {
    pub fn count(&self, state: CellState) -> usize {
        self.data.iter().filter(|&&c| c == state).count()
    }

    pub fn known_count(&self) -> usize {
        self.data.iter().filter(|c| c.is_known()).count()
    }
}

/// Ground-truth environment: only `Free` and `Obstacle` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Maze {
    pub cells: Grid<CellState>,
    pub obstacle_probability: f64,
    pub seed: u64,
}

impl Maze {
    /// Wraps an existing grid after checking the ground-truth invariants.
    pub fn from_cells(cells: Grid<CellState>, obstacle_probability: f64, seed: u64) -> Result<Self> {
        if cells
            .as_slice()
            .iter()
            .any(|c| !matches!(c, CellState::Free | CellState::Obstacle))
        {
            return Err(Error::InvalidParameter(
                "ground truth may only hold Free and Obstacle cells".into(),
            ));
        }
        if !free_space_connected(&cells) {
            return Err(Error::DisconnectedMaze);
        }
        Ok(Self {
            cells,
            obstacle_probability,
            seed,
        })
    }

    pub fn rows(&self) -> usize {
        self.cells.rows()
    }

    pub fn cols(&self) -> usize {
        self.cells.cols()
    }

    pub fn is_free(&self, pos: Pos) -> bool {
        self.cells.get(pos) == Some(&CellState::Free)
    }

    pub fn is_obstacle(&self, pos: Pos) -> bool {
        self.cells.get(pos) == Some(&CellState::Obstacle)
    }

    pub fn free_cells(&self) -> Vec<Pos> {
        self.cells
            .iter()
            .filter(|(_, &c)| c == CellState::Free)
            .map(|(p, _)| p)
            .collect()
    }

    pub fn obstacle_count(&self) -> usize {
        self.cells.count(CellState::Obstacle)
    }

    /// Total ground-truth area `P`: every cell counts, free or not.
    pub fn ground_truth_area(&self) -> usize {
        self.rows() * self.cols()
    }

    /// Hex SHA-256 prefix over dimensions and cell codes.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.rows() as u64).to_le_bytes());
        hasher.update((self.cols() as u64).to_le_bytes());
        for c in self.cells.as_slice() {
            hasher.update([c.code() as u8]);
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Plain-text form: `rows cols`, then one line of `0`/`1` values per row.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows(), self.cols());
        for r in 0..self.rows() {
            let line: Vec<String> = (0..self.cols())
                .map(|c| self.cells[Pos::new(r, c)].code().to_string())
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::MazeParse("empty maze file".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::MazeParse(format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(Error::MazeParse(format!("header must be `rows cols`, got {header:?}")));
        };
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| Error::MazeParse(format!("missing row {r}")))?;
            let row: Vec<CellState> = line
                .split_whitespace()
                .map(|t| match t {
                    "0" => Ok(CellState::Free),
                    "1" => Ok(CellState::Obstacle),
                    other => Err(Error::MazeParse(format!("bad cell value {other:?} in row {r}"))),
                })
                .collect::<Result<_>>()?;
            if row.len() != cols {
                return Err(Error::MazeParse(format!(
                    "row {r} has {} cells, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        if lines.next().is_some() {
            return Err(Error::MazeParse("trailing rows after maze body".into()));
        }
        let cells = Grid::from_vec(rows, cols, data)?;
        let obstacles = cells.count(CellState::Obstacle);
        Maze::from_cells(cells, obstacles as f64 / (rows * cols).max(1) as f64, 0)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Random-walk maze generator with obstacle thinning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MazeGenerator {
    /// Walk length as a multiple of the cell count.
    pub walk_factor: usize,
}

impl Default for MazeGenerator {
    fn default() -> Self {
        Self { walk_factor: 4 }
    }
}

impl MazeGenerator {
    pub fn generate(&self, rows: usize, cols: usize, obstacle_probability: f64, seed: u64) -> Result<Maze> {
        if rows < 3 || cols < 3 {
            return Err(Error::DimensionTooSmall { rows, cols });
        }
        if !(0.0..=1.0).contains(&obstacle_probability) {
            return Err(Error::InvalidParameter(format!(
                "obstacle probability {obstacle_probability} outside [0, 1]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cells = carve(rows, cols, rows * cols * self.walk_factor, &mut rng);
        thin(&mut cells, obstacle_probability, &mut rng);
        keep_largest_free_component(&mut cells);
        Ok(Maze {
            cells,
            obstacle_probability,
            seed,
        })
    }
}

/// Generates a maze with the default walk budget.
pub fn generate_maze(rows: usize, cols: usize, obstacle_probability: f64, seed: u64) -> Result<Maze> {
    MazeGenerator::default().generate(rows, cols, obstacle_probability, seed)
}

/// Random orthogonal walk from a uniform start cell; visited cells become
/// `Free`, everything else `Obstacle`.
pub fn carve(rows: usize, cols: usize, steps: usize, rng: &mut impl Rng) -> Grid<CellState> {
    let mut cells = Grid::new(rows, cols, CellState::Obstacle);
    let mut pos = Pos::new(rng.gen_range(0..rows), rng.gen_range(0..cols));
    cells[pos] = CellState::Free;
    let mut options = Vec::with_capacity(4);
    for _ in 0..steps {
        options.clear();
        options.extend(cells.neighbors4(pos));
        if options.is_empty() {
            break;
        }
        pos = options[rng.gen_range(0..options.len())];
        cells[pos] = CellState::Free;
    }
    cells
}

/// Keeps each obstacle with probability `p`, freeing it otherwise.
pub fn thin(cells: &mut Grid<CellState>, p: f64, rng: &mut impl Rng) {
    let obstacles: Vec<Pos> = cells
        .iter()
        .filter(|(_, &c)| c == CellState::Obstacle)
        .map(|(pos, _)| pos)
        .collect();
    for pos in obstacles {
        if !rng.gen_bool(p) {
            cells[pos] = CellState::Free;
        }
    }
}

/// Labels 4-connected components of `Free` cells; returns per-cell labels and
/// component sizes. Labels are assigned in row-major order of first cell.
fn free_components(cells: &Grid<CellState>) -> (Grid<Option<usize>>, Vec<usize>) {
    let mut label = Grid::new(cells.rows(), cells.cols(), None);
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in cells.positions() {
        if cells[start] != CellState::Free || label[start].is_some() {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        label[start] = Some(id);
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            size += 1;
            for n in cells.neighbors4(p) {
                if cells[n] == CellState::Free && label[n].is_none() {
                    label[n] = Some(id);
                    queue.push_back(n);
                }
            }
        }
        sizes.push(size);
    }
    (label, sizes)
}

/// Converts every `Free` cell outside the largest free component to `Obstacle`.
pub fn keep_largest_free_component(cells: &mut Grid<CellState>) {
    let (label, sizes) = free_components(cells);
    let Some(largest) = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
    else {
        return;
    };
    for pos in cells.positions().collect::<Vec<_>>() {
        if matches!(label[pos], Some(id) if id != largest) {
            cells[pos] = CellState::Obstacle;
        }
    }
}

pub fn free_space_connected(cells: &Grid<CellState>) -> bool {
    free_components(cells).1.len() <= 1
}

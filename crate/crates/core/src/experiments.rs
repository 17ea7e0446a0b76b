//! Batch runs over a configuration matrix, plus the two ranking schemes used
//! to compare methods: Copeland pairwise voting and the composite index.
//!
//! Every (maze spec, agent count, repetition) triple gets one seed, shared by
//! all methods, so each method faces the same maze and the same starting
//! placement.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Simulation, SimulationConfig};
use crate::error::{Error, Result};
use crate::metrics::RunMetrics;
use crate::strategies::{StrategyConfig, StrategyKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MazeSpec {
    pub rows: usize,
    pub cols: usize,
    pub obstacle_probability: f64,
}

impl MazeSpec {
    pub fn new(rows: usize, cols: usize, obstacle_probability: f64) -> Self {
        Self {
            rows,
            cols,
            obstacle_probability,
        }
    }
}

impl fmt::Display for MazeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}@{}", self.rows, self.cols, self.obstacle_probability)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ExperimentMatrix {
    pub methods: Vec<StrategyConfig>,
    pub agent_counts: Vec<usize>,
    pub maze_specs: Vec<MazeSpec>,
    pub repetitions: usize,
    pub base_seed: u64,
    /// Per-run round budget; the engine default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<u64>,
}

impl Default for ExperimentMatrix {
    fn default() -> Self {
        Self {
            methods: StrategyKind::ALL.into_iter().map(StrategyConfig::new).collect(),
            agent_counts: vec![1, 2, 4, 6, 8, 10, 15, 20],
            maze_specs: vec![MazeSpec::new(30, 30, 0.85), MazeSpec::new(30, 30, 0.15)],
            repetitions: 500,
            base_seed: 0,
            max_rounds: None,
        }
    }
}

impl ExperimentMatrix {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
        }
        if self.methods.is_empty() || self.agent_counts.is_empty() || self.maze_specs.is_empty() {
            return Err(Error::InvalidParameter("methods, agent counts and maze specs must be non-empty".into()));
        }
        let mut labels = BTreeSet::new();
        for m in &self.methods {
            m.validate()?;
            if !labels.insert(m.label()) {
                return Err(Error::InvalidParameter(format!("duplicate method label {:?}", m.label())));
            }
        }
        if self.agent_counts.contains(&0) {
            return Err(Error::InvalidParameter("agent counts must be positive".into()));
        }
        Ok(())
    }

    /// Every run in canonical order: spec, agents, repetition, method.
    pub fn cells(&self) -> Vec<RunCell> {
        let mut cells = Vec::new();
        for (spec_index, spec) in self.maze_specs.iter().enumerate() {
            for &agents in &self.agent_counts {
                for rep in 0..self.repetitions {
                    let seed = cell_seed(self.base_seed, spec_index, agents, rep);
                    for method in &self.methods {
                        cells.push(RunCell {
                            method: method.clone(),
                            spec: *spec,
                            agents,
                            rep,
                            seed,
                            max_rounds: self.max_rounds,
                        });
                    }
                }
            }
        }
        cells
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let matrix: Self = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        matrix.validate()?;
        Ok(matrix)
    }
}

/// One simulation of the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RunCell {
    pub method: StrategyConfig,
    pub spec: MazeSpec,
    pub agents: usize,
    pub rep: usize,
    pub seed: u64,
    pub max_rounds: Option<u64>,
}

impl RunCell {
    pub fn key(&self) -> String {
        row_key(&self.method.label(), self.spec, self.agents, self.rep)
    }

    pub fn config(&self) -> SimulationConfig {
        let mut config = SimulationConfig::new(
            self.spec.rows,
            self.spec.cols,
            self.spec.obstacle_probability,
            self.agents,
            self.method.clone(),
            self.seed,
        );
        config.max_rounds = self.max_rounds;
        config
    }

    /// Runs the cell. Failures become flagged rows.
    pub fn run(&self) -> ResultRow {
        let mut sim = match Simulation::new(self.config()) {
            Ok(sim) => sim,
            Err(e) => return ResultRow::failed(self, &e),
        };
        match sim.run() {
            Ok(m) => ResultRow::from_metrics(self, &m, RunStatus::Ok),
            Err(Error::MaxRoundsExceeded { .. }) => ResultRow::from_metrics(self, &sim.metrics(), RunStatus::MaxRounds),
            Err(e) => ResultRow::from_metrics(self, &sim.metrics(), RunStatus::Error(e.to_string())),
        }
    }
}

fn row_key(method: &str, spec: MazeSpec, agents: usize, rep: usize) -> String {
    format!("{method}|{spec}|{agents}|{rep}")
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed shared by all methods of one (spec, agents, repetition) triple.
pub fn cell_seed(base_seed: u64, spec_index: usize, agents: usize, rep: usize) -> u64 {
    [spec_index as u64, agents as u64, rep as u64]
        .into_iter()
        .fold(splitmix64(base_seed), |h, x| splitmix64(h ^ x))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    MaxRounds,
    Error(String),
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Ok => f.write_str("ok"),
            RunStatus::MaxRounds => f.write_str("max_rounds"),
            RunStatus::Error(e) => write!(f, "error: {e}"),
        }
    }
}

/// One CSV row. The first twelve columns are the fixed metrics schema;
/// `rep`, `maze_hash` and `status` follow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub rows: usize,
    pub cols: usize,
    pub obstacle_prob: f64,
    pub agents: usize,
    pub seed: u64,
    pub time_s: f64,
    pub rounds: u64,
    pub cost: u64,
    pub efficiency: Option<f64>,
    pub map_quality: f64,
    pub comm_bits: u64,
    pub rep: usize,
    pub maze_hash: String,
    pub status: String,
}

impl ResultRow {
    fn from_metrics(cell: &RunCell, m: &RunMetrics, status: RunStatus) -> Self {
        Self {
            method: cell.method.label(),
            rows: cell.spec.rows,
            cols: cell.spec.cols,
            obstacle_prob: cell.spec.obstacle_probability,
            agents: cell.agents,
            seed: cell.seed,
            time_s: m.exploration_time,
            rounds: m.rounds,
            cost: m.exploration_cost,
            efficiency: m.exploration_efficiency,
            map_quality: m.map_quality,
            comm_bits: m.comm_cost,
            rep: cell.rep,
            maze_hash: m.metadata.maze_hash.clone(),
            status: status.to_string(),
        }
    }

    fn failed(cell: &RunCell, e: &Error) -> Self {
        Self {
            method: cell.method.label(),
            rows: cell.spec.rows,
            cols: cell.spec.cols,
            obstacle_prob: cell.spec.obstacle_probability,
            agents: cell.agents,
            seed: cell.seed,
            time_s: 0.0,
            rounds: 0,
            cost: 0,
            efficiency: None,
            map_quality: 0.0,
            comm_bits: 0,
            rep: cell.rep,
            maze_hash: String::new(),
            status: RunStatus::Error(e.to_string()).to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn spec(&self) -> MazeSpec {
        MazeSpec::new(self.rows, self.cols, self.obstacle_prob)
    }

    pub fn key(&self) -> String {
        row_key(&self.method, self.spec(), self.agents, self.rep)
    }
}

pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_rows(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

/// Rows already completed by an earlier, interrupted invocation.
fn resume_rows(out: &Path) -> Result<Vec<ResultRow>> {
    let manifest = manifest_path(out);
    if !manifest.exists() || !out.exists() {
        return Ok(Vec::new());
    }
    let done: HashSet<String> = BufReader::new(File::open(&manifest)?)
        .lines()
        .collect::<std::io::Result<_>>()?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(out)?;
    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    // a row torn by the interruption fails to parse and is simply rerun
    for row in reader.deserialize::<ResultRow>().flatten() {
        let key = row.key();
        if done.contains(&key) && seen.insert(key) {
            rows.push(row);
        }
    }
    Ok(rows)
}

struct Sink {
    csv: csv::Writer<File>,
    manifest: File,
}

/// Runs the whole matrix on `workers` threads.
///
/// With `out` set, rows are appended to that CSV as they finish and their
/// keys to `<out>.manifest`; a rerun skips keys already listed. Once every
/// cell is done the CSV is rewritten in canonical order, so identical
/// matrices give identical files apart from `time_s`.
pub fn run_matrix(matrix: &ExperimentMatrix, workers: usize, out: Option<&Path>) -> Result<Vec<ResultRow>> {
    matrix.validate()?;
    let cells = matrix.cells();
    let order: BTreeMap<String, usize> = cells.iter().enumerate().map(|(i, c)| (c.key(), i)).collect();

    let mut finished = match out {
        Some(path) => resume_rows(path)?,
        None => Vec::new(),
    };
    finished.retain(|r| order.contains_key(&r.key()));
    let done: HashSet<String> = finished.iter().map(ResultRow::key).collect();
    let pending: Vec<&RunCell> = cells.iter().filter(|c| !done.contains(&c.key())).collect();

    let sink = match out {
        Some(path) => {
            write_rows(path, &finished)?;
            let manifest_file = manifest_path(path);
            let mut manifest = File::create(&manifest_file)?;
            for row in &finished {
                writeln!(manifest, "{}", row.key())?;
            }
            let file = OpenOptions::new().append(true).open(path)?;
            let csv = csv::WriterBuilder::new()
                .has_headers(finished.is_empty() && fs::metadata(path)?.len() == 0)
                .from_writer(file);
            Some(Mutex::new(Sink { csv, manifest }))
        }
        None => None,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let fresh: Vec<ResultRow> = pool.install(|| {
        pending
            .par_iter()
            .map(|cell| {
                let row = cell.run();
                if let Some(sink) = &sink {
                    let mut sink = sink.lock().expect("sink lock");
                    sink.csv.serialize(&row)?;
                    sink.csv.flush()?;
                    writeln!(sink.manifest, "{}", row.key())?;
                }
                Ok(row)
            })
            .collect::<Result<_>>()
    })?;
    drop(sink);

    finished.extend(fresh);
    finished.sort_by_key(|r| order[&r.key()]);
    if let Some(path) = out {
        write_rows(path, &finished)?;
    }
    Ok(finished)
}

/// Quantities compared across methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Time,
    Rounds,
    Cost,
    Efficiency,
    MapQuality,
    CommCost,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Time,
        Metric::Rounds,
        Metric::Cost,
        Metric::Efficiency,
        Metric::MapQuality,
        Metric::CommCost,
    ];

    /// CSV column holding this metric.
    pub fn column(self) -> &'static str {
        match self {
            Metric::Time => "time_s",
            Metric::Rounds => "rounds",
            Metric::Cost => "cost",
            Metric::Efficiency => "efficiency",
            Metric::MapQuality => "map_quality",
            Metric::CommCost => "comm_bits",
        }
    }

    pub fn lower_is_better(self) -> bool {
        !matches!(self, Metric::Efficiency | Metric::MapQuality)
    }

    pub fn value(self, row: &ResultRow) -> Option<f64> {
        match self {
            Metric::Time => Some(row.time_s),
            Metric::Rounds => Some(row.rounds as f64),
            Metric::Cost => Some(row.cost as f64),
            Metric::Efficiency => row.efficiency,
            Metric::MapQuality => Some(row.map_quality),
            Metric::CommCost => Some(row.comm_bits as f64),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        let metric = match s.as_str() {
            "time" | "time_s" => Metric::Time,
            "rounds" => Metric::Rounds,
            "cost" => Metric::Cost,
            "efficiency" => Metric::Efficiency,
            "map_quality" | "quality" => Metric::MapQuality,
            "comm_bits" | "comm" | "comm_cost" => Metric::CommCost,
            _ => return Err(Error::InvalidParameter(format!("unknown metric {s:?}"))),
        };
        Ok(metric)
    }
}

/// Group of runs compared against each other: one maze spec and agent count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupKey {
    pub rows: usize,
    pub cols: usize,
    pub obstacle_prob: f64,
    pub agents: usize,
}

impl GroupKey {
    fn of(row: &ResultRow) -> Self {
        Self {
            rows: row.rows,
            cols: row.cols,
            obstacle_prob: row.obstacle_prob,
            agents: row.agents,
        }
    }

    fn sort_key(&self) -> (usize, usize, u64, usize) {
        (self.rows, self.cols, self.obstacle_prob.to_bits(), self.agents)
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}@{}/{} agents", self.rows, self.cols, self.obstacle_prob, self.agents)
    }
}

/// Mean of `metric` per group and method over successful runs.
pub fn group_means(rows: &[ResultRow], metric: Metric) -> Vec<(GroupKey, BTreeMap<String, f64>)> {
    let mut sums: BTreeMap<(usize, usize, u64, usize), (GroupKey, BTreeMap<String, (f64, usize)>)> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.is_ok()) {
        let group = GroupKey::of(row);
        let entry = sums.entry(group.sort_key()).or_insert_with(|| (group, BTreeMap::new()));
        let slot = entry.1.entry(row.method.clone()).or_insert((0.0, 0));
        if let Some(v) = metric.value(row) {
            slot.0 += v;
            slot.1 += 1;
        }
    }
    sums.into_values()
        .map(|(group, methods)| {
            let means = methods
                .into_iter()
                .filter(|(_, (_, n))| *n > 0)
                .map(|(m, (s, n))| (m, s / n as f64))
                .collect();
            (group, means)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopelandEntry {
    pub method: String,
    pub wins: f64,
    pub losses: f64,
    /// `wins - losses`.
    pub score: f64,
}

/// Copeland ranking over settings.
///
/// In every setting, each unordered pair of methods casts one vote for the
/// better mean (half each on ties). A method's score is its votes won minus
/// votes lost; methods missing from a setting take no part in it. The result
/// is sorted by score, descending, then by name.
pub fn copeland_rank<S>(scores: &BTreeMap<S, BTreeMap<String, f64>>, lower_is_better: bool) -> Vec<CopelandEntry> {
    let methods: BTreeSet<&String> = scores.values().flat_map(|m| m.keys()).collect();
    let mut tally: BTreeMap<&String, (f64, f64)> = methods.iter().map(|&m| (m, (0.0, 0.0))).collect();
    for setting in scores.values() {
        let entries: Vec<(&String, f64)> = setting.iter().map(|(m, &v)| (m, v)).collect();
        for (i, &(a, va)) in entries.iter().enumerate() {
            for &(b, vb) in &entries[i + 1..] {
                let a_better = if lower_is_better { va < vb } else { va > vb };
                let b_better = if lower_is_better { vb < va } else { vb > va };
                let (wa, wb) = match (a_better, b_better) {
                    (true, false) => (1.0, 0.0),
                    (false, true) => (0.0, 1.0),
                    _ => (0.5, 0.5),
                };
                let ta = tally.get_mut(a).expect("known method");
                ta.0 += wa;
                ta.1 += wb;
                let tb = tally.get_mut(b).expect("known method");
                tb.0 += wb;
                tb.1 += wa;
            }
        }
    }
    let mut ranking: Vec<CopelandEntry> = tally
        .into_iter()
        .map(|(m, (wins, losses))| CopelandEntry {
            method: m.clone(),
            wins,
            losses,
            score: wins - losses,
        })
        .collect();
    ranking.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.method.cmp(&b.method)));
    ranking
}

/// Copeland ranking from CSV rows; each (spec, agents) group is a setting.
pub fn copeland_from_rows(rows: &[ResultRow], metric: Metric) -> Vec<CopelandEntry> {
    let settings: BTreeMap<usize, BTreeMap<String, f64>> =
        group_means(rows, metric).into_iter().map(|(_, m)| m).enumerate().collect();
    copeland_rank(&settings, metric.lower_is_better())
}

/// Maps values to `[0, 1]` with higher meaning better. A constant set maps
/// to all ones.
pub fn normalize_scores(values: &[f64], lower_is_better: bool) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return vec![1.0; values.len()];
    }
    values
        .iter()
        .map(|&v| {
            let n = (v - min) / (max - min);
            if lower_is_better {
                1.0 - n
            } else {
                n
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScores {
    pub group: GroupKey,
    /// Mean per metric, then method.
    pub means: BTreeMap<Metric, BTreeMap<String, f64>>,
    /// Normalised contribution per metric, then method.
    pub contributions: BTreeMap<Metric, BTreeMap<String, f64>>,
    pub composite: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub metrics: Vec<Metric>,
    pub groups: Vec<GroupScores>,
}

impl RankingTable {
    pub fn group(&self, agents: usize, spec: MazeSpec) -> Option<&GroupScores> {
        self.groups
            .iter()
            .find(|g| g.group.agents == agents && GroupKey::of_spec(spec, agents).sort_key() == g.group.sort_key())
    }

    /// Long-format CSV: one line per group and method.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = vec!["rows", "cols", "obstacle_prob", "agents", "method", "composite"];
        header.extend(self.metrics.iter().map(|m| m.column()));
        writer.write_record(&header)?;
        for g in &self.groups {
            for (method, score) in &g.composite {
                let mut record = vec![
                    g.group.rows.to_string(),
                    g.group.cols.to_string(),
                    g.group.obstacle_prob.to_string(),
                    g.group.agents.to_string(),
                    method.clone(),
                    score.to_string(),
                ];
                for m in &self.metrics {
                    record.push(g.means[m].get(method).map(|v| v.to_string()).unwrap_or_default());
                }
                writer.write_record(&record)?;
            }
        }
        writer.flush()?;
        Ok(())
    }
}

impl GroupKey {
    fn of_spec(spec: MazeSpec, agents: usize) -> Self {
        Self {
            rows: spec.rows,
            cols: spec.cols,
            obstacle_prob: spec.obstacle_probability,
            agents,
        }
    }
}

/// Composite index over all six metrics.
pub fn composite_index(rows: &[ResultRow]) -> Result<RankingTable> {
    composite_index_with(rows, &Metric::ALL)
}

/// Composite index: per group and metric, method means are min-max
/// normalised (inverted where lower is better) and summed with equal weights.
/// Flagged rows are left out. A metric with no value for some method (an
/// efficiency undefined in every run) contributes zero for that method.
pub fn composite_index_with(rows: &[ResultRow], metrics: &[Metric]) -> Result<RankingTable> {
    let methods: BTreeSet<String> = rows.iter().map(|r| r.method.clone()).collect();
    let mut by_group: BTreeMap<(usize, usize, u64, usize), GroupScores> = BTreeMap::new();
    for row in rows {
        let group = GroupKey::of(row);
        by_group.entry(group.sort_key()).or_insert_with(|| GroupScores {
            group,
            means: BTreeMap::new(),
            contributions: BTreeMap::new(),
            composite: BTreeMap::new(),
        });
    }
    for &metric in metrics {
        for (group, means) in group_means(rows, metric) {
            by_group.get_mut(&group.sort_key()).expect("group seen").means.insert(metric, means);
        }
    }

    for g in by_group.values_mut() {
        let present: BTreeSet<&String> = rows
            .iter()
            .filter(|r| r.is_ok() && GroupKey::of(r).sort_key() == g.group.sort_key())
            .map(|r| &r.method)
            .collect();
        if let Some(missing) = methods.iter().find(|m| !present.contains(m)) {
            return Err(Error::MissingMethod {
                method: missing.clone(),
                group: g.group.to_string(),
            });
        }
        for m in &methods {
            g.composite.insert(m.clone(), 0.0);
        }
        for &metric in metrics {
            let means = g.means.entry(metric).or_default();
            let names: Vec<&String> = means.keys().collect();
            let values: Vec<f64> = means.values().copied().collect();
            let normalized = normalize_scores(&values, metric.lower_is_better());
            let contribution: BTreeMap<String, f64> =
                names.into_iter().cloned().zip(normalized).collect();
            for (m, c) in &contribution {
                *g.composite.get_mut(m).expect("method listed") += c;
            }
            g.contributions.insert(metric, contribution);
        }
    }
    Ok(RankingTable {
        metrics: metrics.to_vec(),
        groups: by_group.into_values().collect(),
    })
}

/// Label used for a CU-LVP variant in a lambda sweep.
pub fn lambda_label(lambda: f64) -> String {
    format!("culvp-lambda-{lambda}")
}

/// Matrix comparing CU-LVP under several lambda values.
pub fn lambda_sweep_matrix(
    lambdas: &[f64],
    maze_specs: Vec<MazeSpec>,
    agent_counts: Vec<usize>,
    repetitions: usize,
    base_seed: u64,
) -> ExperimentMatrix {
    let methods = lambdas
        .iter()
        .map(|&lambda| {
            let mut cfg = StrategyConfig::new(StrategyKind::Culvp).with_label(lambda_label(lambda));
            cfg.lambda = lambda;
            cfg
        })
        .collect();
    ExperimentMatrix {
        methods,
        agent_counts,
        maze_specs,
        repetitions,
        base_seed,
        max_rounds: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(table: &[(&str, &[(&str, f64)])]) -> BTreeMap<String, BTreeMap<String, f64>> {
        table
            .iter()
            .map(|(s, ms)| (s.to_string(), ms.iter().map(|(m, v)| (m.to_string(), *v)).collect()))
            .collect()
    }

    #[test]
    fn seeds_ignore_method_and_vary_with_cell() {
        let a = cell_seed(7, 0, 4, 0);
        assert_eq!(a, cell_seed(7, 0, 4, 0));
        assert_ne!(a, cell_seed(7, 0, 4, 1));
        assert_ne!(a, cell_seed(7, 1, 4, 0));
        assert_ne!(a, cell_seed(7, 0, 8, 0));
        assert_ne!(a, cell_seed(8, 0, 4, 0));
    }

    #[test]
    fn cell_count_matches_matrix_size() {
        let matrix = ExperimentMatrix {
            methods: vec![StrategyConfig::new(StrategyKind::Culvp), StrategyConfig::new(StrategyKind::Nearest)],
            agent_counts: vec![2],
            maze_specs: vec![MazeSpec::new(10, 10, 0.5)],
            repetitions: 3,
            base_seed: 1,
            max_rounds: None,
        };
        let cells = matrix.cells();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0].seed, cells[1].seed);
        assert_ne!(cells[0].seed, cells[2].seed);
    }

    #[test]
    fn matrix_validation() {
        let mut m = ExperimentMatrix::default();
        assert!(m.validate().is_ok());
        m.repetitions = 0;
        assert!(m.validate().is_err());
        let mut m = ExperimentMatrix::default();
        m.methods.push(StrategyConfig::new(StrategyKind::Culvp));
        assert!(m.validate().is_err());
    }

    #[test]
    fn matrix_json_uses_camel_case_and_defaults() {
        let m: ExperimentMatrix =
            serde_json::from_str(r#"{"agentCounts":[4],"repetitions":2,"baseSeed":9}"#).unwrap();
        assert_eq!(m.agent_counts, vec![4]);
        assert_eq!(m.methods.len(), 6);
        assert_eq!(m.maze_specs.len(), 2);
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("mazeSpecs") && text.contains("obstacleProbability"));
    }

    #[test]
    fn copeland_unanimous_and_ties() {
        let s = scores(&[("a", &[("x", 1.0), ("y", 2.0)]), ("b", &[("x", 3.0), ("y", 4.0)])]);
        let r = copeland_rank(&s, true);
        assert_eq!(r[0].method, "x");
        assert_eq!(r[0].score, 2.0);
        assert_eq!(r[1].score, -2.0);

        let s = scores(&[("a", &[("x", 1.0), ("y", 1.0), ("z", 1.0)])]);
        assert!(copeland_rank(&s, false).iter().all(|e| e.score == 0.0));
    }

    #[test]
    fn normalisation_inverts_and_handles_constants() {
        assert_eq!(normalize_scores(&[1.0, 3.0, 2.0], false), vec![0.0, 1.0, 0.5]);
        assert_eq!(normalize_scores(&[1.0, 3.0, 2.0], true), vec![1.0, 0.0, 0.5]);
        assert_eq!(normalize_scores(&[5.0, 5.0], true), vec![1.0, 1.0]);
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("cost".parse::<Metric>().unwrap(), Metric::Cost);
        assert_eq!("comm_bits".parse::<Metric>().unwrap(), Metric::CommCost);
        assert!("speed".parse::<Metric>().is_err());
        assert!(Metric::Time.lower_is_better());
        assert!(!Metric::MapQuality.lower_is_better());
    }
}

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use mazeswarm::engine::RoundRecord;
use mazeswarm::experiments::{
    composite_index, copeland_from_rows, lambda_label, lambda_sweep_matrix, read_rows, run_matrix, ExperimentMatrix,
    MazeSpec, Metric,
};
use mazeswarm::{Maze, Simulation, SimulationConfig, StrategyConfig, StrategyKind};

#[derive(Parser)]
#[command(name = "mazeswarm", version, about = "Multiagent maze exploration simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and print its metrics as JSON.
    Simulate(SimulateArgs),
    /// Run an experiment matrix and write one CSV row per run.
    Bench(BenchArgs),
    /// Rank methods from a bench CSV.
    Rank(RankArgs),
    /// Compare CU-LVP lambda values with Copeland voting.
    SweepLambda(SweepArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 30)]
    rows: usize,
    #[arg(long, default_value_t = 30)]
    cols: usize,
    #[arg(long, default_value_t = 0.85)]
    obstacle_prob: f64,
    #[arg(long, default_value_t = 4)]
    agents: usize,
    #[arg(long, default_value = "culvp")]
    method: StrategyKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-round JSON-lines log.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    dump_maze: Option<PathBuf>,
    /// Use this maze instead of generating one.
    #[arg(long)]
    load_maze: Option<PathBuf>,
    /// Region id of every cell after every round, as CSV.
    #[arg(long)]
    dump_partition: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    view_range: usize,
    /// Broadcast range as a fraction of the larger maze dimension.
    #[arg(long, default_value_t = 0.25)]
    broadcast_frac: f64,
    #[arg(long, default_value_t = 0.2)]
    lambda: f64,
    #[arg(long, default_value_t = 0.8)]
    lambda_jgr: f64,
    #[arg(long, default_value_t = 100)]
    hedac_iters: usize,
    #[arg(long, default_value_t = 10.0)]
    hedac_a: f64,
    #[arg(long)]
    no_anti_collision: bool,
    /// Defaults to 50 * rows * cols.
    #[arg(long)]
    max_rounds: Option<u64>,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Experiment matrix as JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Overridden by MAZESWARM_WORKERS.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Override the matrix repetition count.
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankMode {
    Copeland,
    Composite,
}

#[derive(clap::Args)]
struct RankArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "composite")]
    mode: RankMode,
    /// Compared column for Copeland voting.
    #[arg(long, default_value = "cost")]
    metric: Metric,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.0,0.2,0.5,1.0")]
    values: Vec<f64>,
    /// Square maze sizes.
    #[arg(long, value_delimiter = ',', default_value = "15,30,50")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.85")]
    obstacle_probs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "4")]
    agents: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value = "cost")]
    metric: Metric,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Raw per-run CSV.
    #[arg(long, default_value = "lambda_sweep.csv")]
    out: PathBuf,
}

fn workers(flag: usize) -> Result<usize> {
    match std::env::var("MAZESWARM_WORKERS") {
        Ok(v) => v.trim().parse().with_context(|| format!("MAZESWARM_WORKERS={v:?} is not a count")),
        Err(_) => Ok(flag),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut strategy = StrategyConfig::new(args.method);
    strategy.lambda = args.lambda;
    strategy.lambda_jgr = args.lambda_jgr;
    strategy.hedac_iterations = args.hedac_iters;
    strategy.hedac_a = args.hedac_a;
    strategy.anti_collision = !args.no_anti_collision;

    let mut config = SimulationConfig::new(args.rows, args.cols, args.obstacle_prob, args.agents, strategy, args.seed);
    config.view_range = args.view_range;
    config.broadcast_fraction = args.broadcast_frac;
    config.max_rounds = args.max_rounds;

    let mut sim = match &args.load_maze {
        Some(path) => {
            let maze = Maze::load(path).with_context(|| format!("loading {}", path.display()))?;
            config.obstacle_probability = maze.obstacle_probability;
            Simulation::with_maze(config, maze)?
        }
        None => Simulation::new(config)?,
    };
    if let Some(path) = &args.dump_maze {
        sim.maze().save(path)?;
    }

    let mut trace = args.trace.as_ref().map(File::create).transpose()?.map(BufWriter::new);
    let mut partition = args.dump_partition.as_ref().map(File::create).transpose()?.map(BufWriter::new);
    let metrics = sim.run_with(|sim, record: &RoundRecord| {
        if let Some(w) = trace.as_mut() {
            serde_json::to_writer(&mut *w, record)?;
            writeln!(w)?;
        }
        if let Some(w) = partition.as_mut() {
            let regions = sim.partition().region_grid();
            for r in 0..regions.rows() {
                let ids: Vec<String> =
                    (0..regions.cols()).map(|c| regions[mazeswarm::Pos::new(r, c)].to_string()).collect();
                writeln!(w, "{},{},{}", record.round, r, ids.join(","))?;
            }
        }
        Ok(())
    });
    if let Some(mut w) = trace {
        w.flush()?;
    }
    if let Some(mut w) = partition {
        w.flush()?;
    }
    println!("{}", serde_json::to_string_pretty(&metrics?)?);
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut matrix = ExperimentMatrix::load(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    if let Some(reps) = args.reps {
        matrix.repetitions = reps;
    }
    let rows = run_matrix(&matrix, workers(args.workers)?, Some(&args.out))?;
    let flagged = rows.iter().filter(|r| !r.is_ok()).count();
    eprintln!("{} runs written to {} ({flagged} flagged)", rows.len(), args.out.display());
    Ok(())
}

fn rank(args: RankArgs) -> Result<()> {
    let rows = read_rows(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    match args.mode {
        RankMode::Copeland => {
            let ranking = copeland_from_rows(&rows, args.metric);
            let mut out: Box<dyn Write> = match &args.out {
                Some(p) => Box::new(File::create(p)?),
                None => Box::new(std::io::stdout()),
            };
            let mut w = csv::Writer::from_writer(&mut out);
            for entry in &ranking {
                w.serialize(entry)?;
            }
            w.flush()?;
        }
        RankMode::Composite => {
            let table = composite_index(&rows)?;
            match &args.out {
                Some(p) => table.write_csv(p)?,
                None => {
                    for g in &table.groups {
                        for (method, score) in &g.composite {
                            println!("{}\t{method}\t{score:.4}", g.group);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    if args.values.is_empty() {
        bail!("no lambda values given");
    }
    let specs = args
        .sizes
        .iter()
        .flat_map(|&n| args.obstacle_probs.iter().map(move |&p| MazeSpec::new(n, n, p)))
        .collect();
    let matrix = lambda_sweep_matrix(&args.values, specs, args.agents.clone(), args.reps, args.seed);
    let rows = run_matrix(&matrix, workers(args.workers)?, Some(&args.out))?;
    let ranking = copeland_from_rows(&rows, args.metric);
    println!("lambda,copeland_score,wins,losses");
    for entry in &ranking {
        let lambda = args
            .values
            .iter()
            .find(|&&l| lambda_label(l) == entry.method)
            .map(|l| l.to_string())
            .unwrap_or_else(|| entry.method.clone());
        println!("{lambda},{},{},{}", entry.score, entry.wins, entry.losses);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(args) => simulate(args),
        Command::Bench(args) => bench(args),
        Command::Rank(args) => rank(args),
        Command::SweepLambda(args) => sweep(args),
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fractal_geom::harness::{error_record, run_experiment, write_outputs, Command, ExperimentConfig};
use fractal_geom::{Error, GeneratorSpec, Tolerance};

/// Geometry toolkit for pointsets of low fractal dimension.
///
/// Every command runs over instances from `--gen` and prints CSV to stdout,
/// or writes `<out>.csv` and `<out>.json` when `--out` is given. Set
/// FRACTAL_GEOM_THREADS to cap the worker pool.
#[derive(Parser)]
#[command(name = "fractal-geom", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a pointset (JSON with --json or --out)
    Generate(Common),
    /// Fractal, box-counting and doubling dimension estimates
    EstimateDim(Common),
    /// Balanced sphere separator of radius-eps balls around the points
    Separator(Common),
    /// Exact TSP by separator divide and conquer (n <= 12)
    Tsp(Common),
    /// Separator TSP against Held-Karp
    TspCompare(Common),
    /// Exact rectilinear Steiner minimal tree (n <= 8, d = 2)
    Rsmt(Common),
    /// k disjoint unit balls centered at input points (n <= 20)
    Is(Common),
    /// Shifted-grid eps-cover
    Cover(Common),
    /// Shifted-grid eps-packing
    Pack(Common),
    /// Box-tree spanner and its pruned subgraph, with dilations
    Spanner(Common),
    /// Path decomposition of the pruned spanner
    Pathwidth(Common),
    /// Pathwidth over the generator's family and the fitted exponent
    Scaling(Common),
}

#[derive(Args)]
struct Common {
    /// Generator: carpet:K, cantor:K[:D], grid:M:D, line:N, random:N:D[:SEED], optional @SCALE
    #[arg(long = "gen", default_value = "random:10:2")]
    generator: String,
    /// Base seed; repetition r uses seed + r
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Geometric tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Output stem for <out>.csv and <out>.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON artifact instead of CSV
    #[arg(long)]
    json: bool,
}

impl Cmd {
    fn split(self) -> (Command, Common) {
        match self {
            Cmd::Generate(c) => (Command::Generate, c),
            Cmd::EstimateDim(c) => (Command::EstimateDim, c),
            Cmd::Separator(c) => (Command::Separator, c),
            Cmd::Tsp(c) => (Command::Tsp, c),
            Cmd::TspCompare(c) => (Command::TspCompare, c),
            Cmd::Rsmt(c) => (Command::Rsmt, c),
            Cmd::Is(c) => (Command::Is, c),
            Cmd::Cover(c) => (Command::Cover, c),
            Cmd::Pack(c) => (Command::Pack, c),
            Cmd::Spanner(c) => (Command::Spanner, c),
            Cmd::Pathwidth(c) => (Command::Pathwidth, c),
            Cmd::Scaling(c) => (Command::Scaling, c),
        }
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("FRACTAL_GEOM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("FRACTAL_GEOM_THREADS must be a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(command: Command, c: Common) -> Result<(), Error> {
    configure_threads()?;
    let generator: GeneratorSpec = c.generator.parse()?;
    let cfg = ExperimentConfig {
        command,
        generator,
        eps: c.eps,
        ell: c.ell,
        k: c.k,
        seed: c.seed,
        repetitions: c.reps,
        tol: Tolerance::new(c.tol)?,
        out: c.out,
    };
    let output = run_experiment(&cfg)?;
    match &cfg.out {
        Some(stem) => {
            for path in write_outputs(stem, &output)? {
                eprintln!("wrote {}", path.display());
            }
        }
        None if c.json => println!("{}", output.json),
        None => print!("{}", output.csv),
    }
    Ok(())
}

fn main() -> ExitCode {
    let (command, common) = Cli::parse().command.split();
    match run(command, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_record(Some(command), &e));
            ExitCode::FAILURE
        }
    }
}

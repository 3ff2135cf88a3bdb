use std::path::PathBuf;

use berrt::BackendKind;
use clap::Parser;

use berrt_cli::report::EmitFormat;
use berrt_cli::{emit, run_matrix, summarize, CliError, TrialSpec};

/// Benchmark harness for the BERRT# / PI-RRT# planner.
///
/// Runs a trial matrix over problem sizes, batch sizes and exploitation
/// backends on one scenario, prints a per-cell summary with speedup and
/// crossover columns, and optionally writes the raw records to CSV or JSON.
#[derive(Parser, Debug)]
#[command(name = "berrt", version, about)]
struct Args {
    /// Scenario file (JSON: bounds, obstacles, init, goal).
    #[arg(long)]
    scenario: PathBuf,

    /// Problem sizes N (total extension attempts), comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    samples: Vec<usize>,

    /// Batch sizes S (extensions per replan), comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    batch: Vec<usize>,

    /// Exploitation backends to test, comma-separated (serial, parallel).
    #[arg(long, value_delimiter = ',', default_value = "serial")]
    backend: Vec<BackendKind>,

    /// Independent trials per matrix cell.
    #[arg(long, default_value_t = 5)]
    trials: usize,

    /// Base seed; per-cell seeds derive from it and the cell coordinates.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Convergence tolerance for the in-loop replans.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,

    /// Worker threads for the parallel backend. Defaults to the
    /// BERRT_WORKERS environment variable, then to hardware parallelism.
    #[arg(long)]
    workers: Option<usize>,

    /// Write raw run records to this path.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format for --out.
    #[arg(long, default_value = "csv")]
    format: EmitFormat,

    /// Enable all validation-mode invariant checks (duplicate edges, policy
    /// cycles, frontier uniqueness, staging watermark).
    #[arg(long)]
    validate: bool,
}

fn workers_from_env() -> Option<usize> {
    std::env::var("BERRT_WORKERS").ok()?.parse().ok()
}

fn run(args: Args) -> Result<(), CliError> {
    let mut spec = TrialSpec::new(&args.scenario);
    spec.n_values = args.samples;
    spec.s_values = args.batch;
    spec.backends = args.backend;
    spec.trials = args.trials;
    spec.base_seed = args.seed;
    spec.epsilon = args.epsilon;
    spec.workers = args.workers.or_else(workers_from_env).unwrap_or(0);
    spec.validate = args.validate;

    let records = run_matrix(&spec)?;
    print!("{}", summarize(&records));
    if let Some(path) = &args.out {
        emit(&records, args.format, path)?;
        eprintln!("wrote {} records to {}", records.len(), path.display());
    }
    Ok(())
}

fn main() {
    let args = Args::parse();
    if let Err(e) = run(args) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

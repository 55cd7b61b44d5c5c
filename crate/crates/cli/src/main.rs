use std::path::PathBuf;

use clap::{Parser, Subcommand};

use polyproj_cli::commands::{self, RunOptions};
use polyproj_cli::UsageError;
use polyproj_core::methods::Method;

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).ok_or_else(|| {
        let known: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!("unknown method '{s}' (known: {})", known.join(", "))
    })
}

#[derive(Parser)]
#[command(
    name = "polyproj",
    version,
    about = "Convex-feasibility solvers over ellipsoid intersections: \
             instance generation, benchmark runs, and 2-D trajectory plots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Parser, Clone, Copy)]
struct SolverArgs {
    /// Stopping slack for the feasibility test
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    /// Constant accuracy parameter for the inexact method, in [0, 1)
    #[arg(long, default_value_t = 0.5)]
    accuracy: f64,
    /// Iteration cap
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Wall-clock cap in seconds
    #[arg(long, default_value_t = 600.0)]
    max_seconds: f64,
}

impl SolverArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            eps: self.eps,
            accuracy: self.accuracy,
            max_iters: self.max_iters,
            max_seconds: self.max_seconds,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file
    Generate {
        /// Number of sets
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        m: u64,
        /// Ambient dimension
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (default instances/m{m}-n{n}-seed{seed}.json)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one method on an instance file and append a CSV result row
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[command(flatten)]
        solver: SolverArgs,
        /// Results CSV (appended; header written when new)
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        /// Optional per-iteration trace CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a grid of sizes x methods x repeated seeds, with per-cell
    /// summary rows
    Bench {
        /// Comma-separated sizes, e.g. 3x10,10x50
        #[arg(long)]
        sizes: String,
        /// Comma-separated method names, or "all"
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Base seed; repeat r uses seed + r
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "bench.csv")]
        out: PathBuf,
    },
    /// Plot the iterate trajectory of a 2-D instance as SVG
    Trace2d {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_method, default_value = "3pm")]
        method: Method,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "trace.svg")]
        out: PathBuf,
    },
}

fn init_thread_pool() -> Result<(), UsageError> {
    let Ok(raw) = std::env::var("POLYPROJ_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| UsageError(format!("POLYPROJ_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| UsageError(format!("thread pool setup failed: {e}")))
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate { m, n, seed, out } => {
            commands::cmd_generate(m as usize, n as usize, seed, out)?;
            Ok(())
        }
        Command::Run {
            instance,
            method,
            solver,
            out,
            trace,
        } => commands::cmd_run(&instance, method, &solver.options(), &out, trace.as_deref()),
        Command::Bench {
            sizes,
            methods,
            repeats,
            seed,
            solver,
            out,
        } => commands::cmd_bench(&sizes, &methods, repeats, seed, &solver.options(), &out),
        Command::Trace2d {
            instance,
            method,
            solver,
            out,
        } => commands::cmd_trace2d(&instance, method, &solver.options(), &out),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = init_thread_pool() {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
    if let Err(e) = dispatch(cli) {
        if e.downcast_ref::<UsageError>().is_some() {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
        eprintln!("error: {e:#}");
        std::process::exit(3);
    }
}

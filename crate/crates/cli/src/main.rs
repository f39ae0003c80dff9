//! Experiment harness for hypergraph SBM spectral detection.
//!
//! Subcommands: generate, saw, detect, stats, gw, sweep, verify. All
//! randomness flows from --seed; any output file is a pure function of the
//! command line and its input files. Exit codes: 0 ok, 1 suite or run
//! failure, 2 usage.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod runs;
mod sweep;
mod verify;

#[derive(Parser)]
#[command(
    name = "hsbm",
    version,
    about = "Spectral community detection on sparse uniform hypergraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Vertex count
    #[arg(long, required_unless_present = "config")]
    n: Option<usize>,
    /// Hyperedge size
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Same-community rate constant
    #[arg(long, required_unless_present = "config")]
    a: Option<f64>,
    /// Cross-community rate constant
    #[arg(long, required_unless_present = "config")]
    b: Option<f64>,
    /// RNG seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// JSON record {n, d, a, b, seed, l?} instead of individual flags
    #[arg(long, conflicts_with_all = ["n", "a", "b"])]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a hypergraph block model instance to a file (.json or .bin)
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the self-avoiding-walk matrix B^(l) of a stored hypergraph
    Saw {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spectral detection on a stored hypergraph
    Detect {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        l: usize,
        /// Threshold t of the label rule x_i >= t / sqrt(n)
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        /// Score against the spins stored in the input file
        #[arg(long)]
        truth: bool,
        /// Report overlap over a grid of thresholds (needs --truth)
        #[arg(long)]
        t_sweep: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Per-vertex neighborhood profiles of a stored hypergraph
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        out: PathBuf,
        /// Model rates: enable growth-residual and tangle-scale diagnostics
        #[arg(long, requires = "b")]
        a: Option<f64>,
        #[arg(long, requires = "a")]
        b: Option<f64>,
    },
    /// Galton-Watson hypertree martingale moments
    Gw {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Root spin (+1 or -1)
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        root_spin: i8,
        /// Also estimate r = P(Delta >= tau) - P(-Delta >= tau) at this tau
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<f64>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Detection sweep over a parameter grid
    Sweep {
        /// Sweep specification (JSON)
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        csv_out: Option<PathBuf>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Run the verification suites
    Verify {
        /// all | saw-oracle | expansion | trace-circuit | gw-moments
        #[arg(long, default_value = "all")]
        suite: String,
        /// Instances for the randomized suites
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Override the expansion-suite instances (guarded sizes)
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        json_out: Option<PathBuf>,
        /// Corrupt one SAW count before comparison (harness self-test)
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn configure_workers() {
    if let Ok(v) = std::env::var("HSBM_WORKERS") {
        if let Ok(threads) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    configure_workers();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate { model, out } => runs::generate(&model, &out),
        Command::Saw { input, l, out } => runs::saw(&input, l, &out),
        Command::Detect {
            input,
            l,
            t,
            truth,
            t_sweep,
            seed,
            json_out,
        } => runs::detect(&input, l, t, truth, t_sweep, seed, json_out.as_deref()),
        Command::Stats {
            input,
            l,
            out,
            a,
            b,
        } => runs::stats(&input, l, &out, a.zip(b)),
        Command::Gw {
            a,
            b,
            d,
            depth,
            samples,
            seed,
            root_spin,
            tau,
            json_out,
        } => runs::gw(
            a,
            b,
            d,
            depth,
            samples,
            seed,
            root_spin,
            tau,
            json_out.as_deref(),
        ),
        Command::Sweep {
            spec,
            csv_out,
            json_out,
        } => sweep::run(&spec, csv_out.as_deref(), json_out.as_deref()),
        Command::Verify {
            suite,
            trials,
            seed,
            n,
            d,
            a,
            b,
            l,
            json_out,
            inject_fault,
        } => {
            let expansion = verify::ExpansionOverride { n, d, a, b, l };
            verify::run(
                &suite,
                trials,
                seed,
                expansion,
                json_out.as_deref(),
                inject_fault,
            )
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1), // a suite reported failures
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

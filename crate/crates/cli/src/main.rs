//! `precis` simulates DNN inference under customized numeric formats,
//! attaches hardware speedup/energy estimates, and searches the format
//! design space for the fastest configuration meeting an accuracy target.

mod commands;
mod report;
mod space;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "precis",
    version,
    about = "Customized-precision DNN inference simulator and format search"
)]
struct Cli {
    /// Emit the run report as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Cost-table file replacing the built-in table of its kind.
    #[arg(long, global = true, value_name = "PATH")]
    cost_table: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Top1,
    Top5,
}

impl Metric {
    fn k(self) -> usize {
        match self {
            Metric::Top1 => 1,
            Metric::Top5 => 5,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Metric::Top1 => "top1",
            Metric::Top5 => "top5",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepMode {
    /// Measure true accuracy for every format.
    Measured,
    /// Predict normalized accuracy from the r2 proxy and a fitted model.
    Predicted,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SampleMode {
    /// The first N inputs (the reproducible default).
    First,
    /// N inputs drawn from a seeded generator.
    Random,
}

#[derive(Subcommand)]
enum Cmd {
    /// Measure one format's accuracy against the automatic baseline pass.
    Eval {
        /// Network manifest (TOML).
        #[arg(long)]
        net: PathBuf,
        /// Dataset spec: `mnist:<images>,<labels>` or `cifar:<batch.bin>`.
        #[arg(long)]
        data: String,
        /// Format literal: `baseline`, `float:m<M>e<E>[b<B>]`, or `fixed:i<I>f<F>`.
        #[arg(long)]
        format: String,
        #[arg(long, value_enum, default_value_t = Metric::Top1)]
        metric: Metric,
        /// Evaluate only the first N inputs.
        #[arg(long)]
        limit: Option<usize>,
    },

    /// Sweep a design space into plot-ready CSV/JSON rows.
    Sweep {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: String,
        /// Space literal, e.g. float:m1-16,e1-8;fixed:i1-16:2,f1-16:2.
        #[arg(long, default_value = "default")]
        space: String,
        #[arg(long, value_enum, default_value_t = SweepMode::Measured)]
        mode: SweepMode,
        /// Sample inputs for r2 scoring.
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Accuracy model (required for --mode predicted).
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Metric::Top1)]
        metric: Metric,
        #[arg(long)]
        limit: Option<usize>,
        /// Output file; .csv or .json by extension.
        #[arg(long)]
        out: PathBuf,
    },

    /// Fast correlation-guided search for the fastest passing format.
    Search {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: String,
        #[arg(long, default_value = "default")]
        space: String,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Normalized-accuracy target the result must meet.
        #[arg(long, default_value_t = 0.99)]
        target: f64,
        /// Validation evaluations the refinement loop may spend.
        #[arg(long, default_value_t = 2)]
        refine: usize,
        /// Accuracy model file (from fit-model).
        #[arg(long, conflicts_with = "fit_from")]
        model: Option<PathBuf>,
        /// Measured sweep file(s) to fit the model from on the fly.
        #[arg(long = "fit-from", num_args = 1..)]
        fit_from: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Metric::Top1)]
        metric: Metric,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, value_enum, default_value_t = SampleMode::First)]
        sample_mode: SampleMode,
        /// Seed for --sample-mode random.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Serialized accumulation trace of one neuron under a format.
    Trace {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: String,
        /// Index of the input to trace.
        #[arg(long)]
        data_index: usize,
        /// Layer index (conv2d or fully_connected).
        #[arg(long)]
        layer: usize,
        /// Flat neuron index within the layer output.
        #[arg(long)]
        neuron: usize,
        #[arg(long)]
        format: String,
        /// CSV output path (header: step,running_sum,exact_running_sum).
        #[arg(long)]
        out: PathBuf,
    },

    /// Fit the r2 -> normalized-accuracy model from measured sweeps.
    FitModel {
        /// Measured sweep file(s) written by `sweep --mode measured`.
        #[arg(long, num_args = 1.., required = true)]
        sweeps: Vec<PathBuf>,
        /// Model JSON output path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("PRECIS_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

/// Die quietly when the consumer of our stdout goes away (`precis ... | head`).
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    init_thread_pool();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

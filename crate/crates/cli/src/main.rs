//! `boxing`: command-line driver for the content, cover, cascade and
//! good-ball experiments.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "boxing", version, about = "Dyadic content, covers, filling cascades and good balls")]
pub struct Cli {
    /// Seed for generators and the projection-center search.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for batch runs; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub json_out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// Input cells: a JSON file or a random generator.
#[derive(Args, Debug, Clone)]
pub struct CellsInput {
    /// Voxel set as JSON: `{"n":2,"base_level":0,"cells":[[0,0],...]}`.
    #[arg(long, conflicts_with = "generator")]
    pub input: Option<PathBuf>,
    /// Generator used when no input file is given.
    #[arg(long, value_enum, default_value_t = Generator::Random)]
    pub generator: Generator,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Grid side length in cells.
    #[arg(long, default_value_t = 16)]
    pub side: i64,
    /// Cell probability for the random generator.
    #[arg(long, default_value_t = 0.05)]
    pub fill: f64,
    /// Cell count for the connected generator.
    #[arg(long, default_value_t = 60)]
    pub cells: usize,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Random,
    TwoScale,
    Connected,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dyadic content of a voxel set.
    Content {
        #[command(flatten)]
        cells: CellsInput,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Also run the exhaustive oracle (at most 64 cells).
        #[arg(long)]
        brute: bool,
    },
    /// Near-optimal, low-density and collar covers.
    Cover {
        #[command(flatten)]
        cells: CellsInput,
        #[arg(long, default_value_t = 1.5)]
        m: f64,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Full cascade on one input, with the step log.
    Fill {
        #[command(flatten)]
        cells: CellsInput,
        #[arg(long, default_value_t = 1.5)]
        m: f64,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Good-ball selection and emptying on clustered points.
    Goodballs {
        /// Point cloud as JSON: `{"n":2,"points":[[x,y],...]}`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.5)]
        m: f64,
        #[arg(long, default_value_t = 3)]
        clusters: usize,
        #[arg(long, default_value_t = 8)]
        per_cluster: usize,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
    /// Table of filling constants.
    Constants {
        #[arg(long, default_value_t = 5)]
        m_max: u32,
    },
    /// Finite-dimensional reduction on random balls.
    Reduce {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        m: f64,
        #[arg(long, default_value_t = 5)]
        balls: usize,
        #[arg(long, default_value_t = 40)]
        points: usize,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
    },
    /// Content of connected domains against their boundary layer.
    BoxingRatio {
        #[command(flatten)]
        cells: CellsInput,
        #[arg(long, value_delimiter = ',', default_values_t = vec![2.0])]
        m: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
    /// Cover, collar and cascade with every check, over many inputs.
    Pipeline {
        #[command(flatten)]
        cells: CellsInput,
        #[arg(long, default_value_t = 1.5)]
        m: f64,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
    /// SVG picture of a planar input with its collar cover and cascade.
    Svg {
        #[command(flatten)]
        cells: CellsInput,
        #[arg(long, default_value_t = 1.5)]
        m: f64,
        /// Overlays to draw.
        #[arg(long, value_delimiter = ',', default_values_t = vec!["cover".to_string(), "cascade".to_string()])]
        overlay: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Growth ratios of unconstrained projection centers.
    Calibrate {
        #[command(flatten)]
        cells: CellsInput,
        #[arg(long, default_value_t = 1.5)]
        m: f64,
        #[arg(long, default_value_t = 10)]
        runs: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; help and version are not errors
            return ExitCode::from(if e.use_stderr() { commands::EXIT_INPUT } else { 0 });
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    ExitCode::from(commands::run(&cli))
}

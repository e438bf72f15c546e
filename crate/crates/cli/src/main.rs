//! `symdisc`: minimum-error measurements for symmetric coherent-state
//! codebooks from the command line.
//!
//! Subcommands: `gram`, `classify`, `solve`, `verify`, `characters`,
//! `sweep`, `fig1`. Set `SYMDISC_LOG=debug` (any env_logger filter) for
//! diagnostics on stderr. Exit codes: 0 success, 1 solver or verification
//! failure, 2 configuration error.

mod commands;
mod output;
mod source;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Everything one invocation needs, straight from the argument parser.
#[derive(Parser, Debug)]
#[command(name = "symdisc", version, about = "Minimum-error quantum measurements for symmetric coherent-state codebooks")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print a codebook's Gram matrix
    Gram {
        #[command(flatten)]
        source: SourceArgs,
        /// json: rows of [re, im] pairs; csv: interleaved re,im columns
        #[arg(long, value_enum, default_value_t = MatrixFormat::Json)]
        format: MatrixFormat,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Report GU / CGU / asymmetric structure under a group action
    Classify {
        #[command(flatten)]
        source: SourceArgs,
        /// cyclic:N | two-orbit-cyclic:N | sn-pairs:N | auto
        #[arg(long, default_value = "auto")]
        group: String,
        /// Gram invariance tolerance
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compute a minimum-error measurement and report it as JSON
    Solve {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// cyclic:N | two-orbit-cyclic:N | sn-pairs:N | auto
        #[arg(long, default_value = "auto")]
        group: String,
        /// Gram invariance tolerance for classification
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check a solution file against the Yuen-Kennedy-Lax conditions
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        /// Solution JSON with "x" and "w" matrices (as written by solve)
        #[arg(long, value_name = "FILE")]
        solution: PathBuf,
        /// Residual tolerance for all three conditions
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Print a character table, or double-coset character sums, as CSV
    Characters {
        /// cyclic:N | two-orbit-cyclic:N | sn-pairs:N
        #[arg(long)]
        group: String,
        /// Sum characters over double cosets of the stabilizer of point 0
        #[arg(long)]
        cosets: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Error-probability curves over a mean-photon-number grid, as CSV
    Sweep {
        /// Builtin constellation family
        #[arg(long, value_enum)]
        constellation: Family,
        /// Codeword count parameter
        #[arg(long = "N", value_name = "N")]
        n: usize,
        /// Comma list; ppm/ppm2 offer mpe,pnr; pcppm offers mpe,hom,structured.
        /// Defaults to everything the family offers
        #[arg(long)]
        receivers: Option<String>,
        /// Linear grid start:stop:points, e.g. 0:10:101
        #[arg(long, value_name = "A:B:STEPS")]
        nbar_grid: String,
        /// Worker threads (default: available parallelism)
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Search the length-8 second-order Reed-Muller code for the
    /// [8,3,2] subcode with the quoted four-valued optimal measurement
    Fig1 {
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Where the codebook comes from: a builtin constellation or a JSON file,
/// exactly one of the two.
#[derive(Args, Debug)]
pub struct SourceArgs {
    /// Builtin constellation family
    #[arg(long, value_enum, requires = "n", conflicts_with = "codebook")]
    pub constellation: Option<Family>,
    /// Codeword count parameter for a builtin constellation
    #[arg(long = "N", value_name = "N", conflicts_with = "codebook")]
    pub n: Option<usize>,
    /// Mean photon number per pulse for a builtin constellation
    #[arg(long, default_value_t = 1.0, conflicts_with = "codebook")]
    pub nbar: f64,
    /// Codebook JSON file: {"modes": int, "priors": [..] | "equal", "codewords": [[[re, im], ..], ..]}
    #[arg(long, value_name = "FILE")]
    pub codebook: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Write here instead of stdout (atomically: temp file, then rename)
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Pulse position modulation, N codewords on N modes
    Ppm,
    /// Two-pulse PPM, C(N,2) codewords
    Ppm2,
    /// Phase-coded PPM with amplitudes alpha and -alpha, 2N codewords
    Pcppm,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Ppm => "ppm",
            Family::Ppm2 => "ppm2",
            Family::Pcppm => "pcppm",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Classify first: GU goes to the closed form, CGU to the block solver
    Auto,
    /// Pretty good measurement of an arbitrary ensemble
    Pgm,
    /// Representation-theoretic closed form for single-orbit sets
    Gu,
    /// Block-reduced equation solver for multi-orbit sets
    Cgu,
    /// Entrywise solver over a pair-orbit symmetry pattern
    Reduced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    Json,
    Csv,
}

/// A command that could not run to completion, split by whose fault it is.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable files, invalid specs. Exit code 2.
    Config(String),
    /// The computation itself failed or a verification did not pass. Exit 1.
    Run(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Run(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Run(m) => m,
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SYMDISC_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cfg = RunConfig::parse();
    match commands::run(cfg) {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {}", f.message());
            std::process::exit(f.code());
        }
    }
}

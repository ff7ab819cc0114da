//! `bdrep`: command-line front end for multiplicative boundary
//! representations.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use boundary_reps::multrep::Backend;
use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{CliResult, Failure};

#[derive(Parser, Debug)]
#[command(name = "bdrep", version, about = "Matrix systems, boundary representations and their coefficients")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Threshold for the invariant checks run by a command.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Largest sphere size any brute-force sum may visit (at least 1000).
    #[arg(long, global = true, default_value_t = boundary_reps::words::sphere_cap())]
    pub cap: u64,
    /// Seed for every random choice; recorded in CSV headers.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for the parallel kernels; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Coefficient backend.
    #[arg(long, global = true, value_enum, default_value_t = BackendChoice::Fast)]
    pub backend: BackendChoice,
    /// Output file; standard output when omitted.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendChoice {
    Brute,
    Fast,
    Both,
}

impl BackendChoice {
    /// The single backend used where one value is needed.
    pub fn primary(self) -> Backend {
        match self {
            BackendChoice::Brute => Backend::Brute,
            _ => Backend::Fast,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rescale a system to spectral radius one and attach compatible forms.
    Normalize {
        system: PathBuf,
    },
    /// Split a system with positive definite forms into irreducible pieces.
    Decompose {
        system: PathBuf,
    },
    /// Matrix coefficients ⟨π(x)f, f⟩ for a list of words.
    Coefficients {
        system: PathBuf,
        /// Vector file; a seeded random vector of depth 1 when omitted.
        #[arg(long)]
        vector: Option<PathBuf>,
        /// Comma-separated words (`e` is the identity).
        #[arg(long, conflicts_with = "words_file")]
        words: Option<String>,
        /// File with one word per line.
        #[arg(long)]
        words_file: Option<PathBuf>,
        /// Add the exact brute-force value when the system carries exact data.
        #[arg(long)]
        exact: bool,
    },
    /// Induce a system over the free basis of a finite-index subgroup.
    Induce {
        /// System over the subgroup's free basis.
        system: PathBuf,
        /// Quotient specification of the subgroup.
        quotient: PathBuf,
        /// Rank of the ambient free group.
        #[arg(long, default_value_t = 2)]
        rank: usize,
        /// Random vectors used to test the intertwiner.
        #[arg(long, default_value_t = 10)]
        probes: usize,
    },
    /// Coefficients of the representation induced to a virtually free group.
    VfInduce {
        /// Virtually free datum (`{"builtin": "psl2z"}` for the shipped one).
        datum: PathBuf,
        /// System over the free basis of the datum's subgroup.
        system: PathBuf,
        /// Radius of the ball of group elements.
        #[arg(long, default_value_t = 3)]
        radius: usize,
        /// Random routing probes for validation.
        #[arg(long, default_value_t = 500)]
        probes: usize,
    },
    /// Check the Herz majorization on every word up to a radius.
    Herz {
        system: PathBuf,
        #[arg(long)]
        vector: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        radius: usize,
        /// Partition depth beyond |x| + 1.
        #[arg(long, default_value_t = 0)]
        refine: usize,
    },
    /// Quasi-regular coefficients of the powers of a word.
    DemoNoHc {
        /// System whose spectral measure is used.
        #[arg(long, required_unless_present = "uniform")]
        system: Option<PathBuf>,
        #[arg(long)]
        vector: Option<PathBuf>,
        /// Use the uniform measure of the free group of rank `--rank`.
        #[arg(long)]
        uniform: bool,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, default_value = "a")]
        word: String,
        #[arg(long, default_value_t = 6)]
        max_power: usize,
    },
    /// Built-in consistency checks.
    Selftest,
}

fn run(cli: Cli) -> CliResult<()> {
    if cli.global.cap < 1000 {
        return Err(Failure::validation(format!("--cap must be at least 1000, got {}", cli.global.cap)));
    }
    boundary_reps::words::set_sphere_cap(cli.global.cap);
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::validation(e.to_string()))?;
    }
    commands::dispatch(&cli.global, &cli.command)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(report::EXIT_VALIDATION as u8) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}

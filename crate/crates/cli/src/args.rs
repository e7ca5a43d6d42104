use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mimtilt", version, about = "Importance-tilted utility distributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tilt a distribution by a given importance coefficient.
    Compute {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        /// Print the result as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Find the utility distribution for a usage budget.
    Solve {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = Mode::Equality)]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// Tabulate the tilted family over a range of ϖ or β.
    Sweep {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        /// start:stop:step, both ends inclusive
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the closed form against brute-force oracles.
    Verify {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 1e-2)]
        grid_step: f64,
        /// Sequence length for the exact type enumeration.
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// Turn a counts CSV into distribution JSON.
    Ingest {
        #[arg(long)]
        counts: PathBuf,
        /// Usage counts; prints the realized budget β.
        #[arg(long)]
        usage: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Equality,
    Inequality,
}

impl From<Mode> for mimtilt::ConstraintMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Equality => mimtilt::ConstraintMode::Equality,
            Mode::Inequality => mimtilt::ConstraintMode::Inequality,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Omega,
    Beta,
}

//! `quatpolar`: canonical forms, square roots, Witt extensions and polar
//! decompositions on matrix files.
//!
//! Exit codes: 0 success, 1 the requested object provably does not exist,
//! 2 invalid input, 3 numerical ambiguity.

mod commands;
mod literal;
mod matfile;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quatpolar::{ErrorClass, Tolerance};

use report::Format;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    /// Nonexistence, with the report explaining it.
    Nonexistence { message: String, report: Option<String> },
    Core(quatpolar::Error),
}

impl From<quatpolar::Error> for CliError {
    fn from(e: quatpolar::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Nonexistence { .. } => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Nonexistence => 1,
                ErrorClass::InvalidInput => 2,
                ErrorClass::Numerical => 3,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Input(m) => m.clone(),
            CliError::Nonexistence { message, .. } => message.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(name = "quatpolar", version, about = "Quaternion indefinite linear algebra on matrix files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Tolerance override `rank=..`, `residual=..` or `cluster=..`; repeatable.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    tol: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

impl Common {
    pub fn tolerance(&self) -> Result<Tolerance, CliError> {
        let mut tol = Tolerance::default();
        for item in &self.tol {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("--tol expects KEY=VALUE, got `{item}`")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| CliError::Input(format!("--tol {key}: `{value}` is not a number")))?;
            match key {
                "rank" => tol.rank_tol = value,
                "residual" => tol.residual_tol = value,
                "cluster" => tol.cluster_radius = value,
                _ => return Err(CliError::Input(format!("--tol: unknown key `{key}` (rank, residual, cluster)"))),
            }
        }
        if !tol.is_valid() {
            return Err(CliError::Input("tolerances must be positive and finite".into()));
        }
        Ok(tol)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Canonical form of an H-selfadjoint A (sections A, H).
    Canonical {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// H-selfadjoint square root of B (sections B, H).
    Sqrt {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Unitary extension of the map V -> W (sections V, optional W, H, optional H2).
    Witt {
        file: PathBuf,
        /// P1 as a matrix file (section P) or an inline quaternion for 1x1.
        #[arg(long)]
        p1: Option<String>,
        #[arg(long)]
        p2: Option<String>,
        #[arg(long)]
        p3: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// H-polar decomposition X = UA (sections X, H).
    Polar {
        file: PathBuf,
        /// Only evaluate the existence conditions.
        #[arg(long)]
        report_only: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Checks a decomposition (sections X, H, U, A).
    Verify {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generates an instance from a block list such as "0:2:+,0:1:+".
    Gen {
        #[arg(allow_hyphen_values = true)]
        blocks: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "pair")]
        kind: commands::GenKind,
        /// Condition number cap of the random basis of a pair instance.
        #[arg(long, default_value_t = 1e3)]
        cond: f64,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Canonical { file, common } => commands::canonical(&file, &common),
        Command::Sqrt { file, common } => commands::sqrt(&file, &common),
        Command::Witt { file, p1, p2, p3, common } => {
            commands::witt(&file, [p1.as_deref(), p2.as_deref(), p3.as_deref()], &common)
        }
        Command::Polar { file, report_only, common } => commands::polar(&file, report_only, &common),
        Command::Verify { file, common } => commands::verify(&file, &common),
        Command::Gen { blocks, seed, kind, cond } => commands::gen(&blocks, seed, kind, cond),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let CliError::Nonexistence { report: Some(r), .. } = &e {
                print!("{r}");
            }
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

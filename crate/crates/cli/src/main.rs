//! `radial-plap`: condition checks, principal eigenpairs, boundary
//! asymptotics and recursion-decay sweeps for the radial weighted
//! p-Laplacian.
//!
//! Exit codes: `0` pass, `1` verdict fail (or a computation that did not
//! converge), `2` usage error, unknown preset or malformed problem file.

mod commands;
mod output;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "radial-plap", version, about = "Radial weighted p-Laplacian eigenvalue toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Relative tolerance: quadrature for condition checks, eigenvalue
    /// bisection for solves (defaults 1e-10 and 1e-12).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Directory for JSON/CSV outputs and `manifest.json`; nothing is
    /// written when omitted.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Print the JSON report on stdout instead of a text summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for random sweeps.
    #[arg(long, global = true, default_value_t = 43)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct ProblemArg {
    /// Problem specification (JSON).
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Built-in problem: ex61, ex62, rmk22, rmk23, annulus-trivial,
    /// annulus-n3, critical-tail.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the weight hypotheses and print one report per condition.
    CheckConditions {
        #[command(flatten)]
        problem: ProblemArg,
        /// Split point for the one-sided checks.
        #[arg(long)]
        xi: Option<f64>,
        /// Exponent for the one-sided checks (default: midpoint between the
        /// smallest admissible value and p − 1).
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Principal eigenvalue and eigenfunction.
    Solve {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        trunc: Truncation,
        #[arg(long, value_enum, default_value_t = MethodArg::Shoot)]
        method: MethodArg,
        /// Mesh nodes.
        #[arg(long, default_value_t = 2000)]
        nodes: usize,
    },
    /// Envelope sandwich and decay exponents at the boundaries.
    Asymptotics {
        #[command(flatten)]
        problem: ProblemArg,
        /// Eigenfunction CSV (columns r, u, flux) from `solve`; solved on
        /// the fly when omitted.
        #[arg(long)]
        eig: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Both)]
        boundary: BoundaryArg,
        /// Truncation radius for exterior domains (default R1·2^20).
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long, default_value_t = 4000)]
        nodes: usize,
    },
    /// Recursion-decay bound: a single trace or a seeded sweep.
    Degiorgi(DegiorgiArgs),
    /// Full pipeline (check → solve → asymptotics) on a preset.
    ///
    /// All presets live on (1, ∞) unless noted.
    /// ex61: N = 3, p = 2, v = (r−1)^0.5; w = (r−1)^-0.25 on (1, 2), r^-4 beyond.
    /// ex62: N = 3, p = 2, v = (r−1)^-0.5; w = 1 on (1, 2), r^-4 beyond.
    /// rmk22: N = 3, p = 2, v = 1; w = (r−1)^-1.5 on (1, 2), 16 r^-4 beyond.
    /// rmk23: N = 3, p = 2, v = (r−1)^0.5, w = (r−1)^-1 near 1;
    /// v = r, w = r^-3 from 3 on (geometric-mean bands on (2, 3)).
    /// annulus-trivial: N = 1, p = 2, v = w = 1 on (1, 2).
    /// annulus-n3: N = 3, p = 2, v = w = 1 on (1, 2).
    Example {
        #[arg(value_enum)]
        name: ExampleName,
    },
}

#[derive(Args, Debug, Clone)]
#[group(multiple = false)]
pub struct Truncation {
    /// Single truncation radius for exterior domains.
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Ladder R1·2^j, j = 2..=k, with extrapolation (exterior domains).
    #[arg(long)]
    pub ladder: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct DegiorgiArgs {
    #[arg(long = "K", default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub d1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub d2: f64,
    /// Starting value; defaults to 0.99 of the first threshold.
    #[arg(long = "J0")]
    pub j0: Option<f64>,
    /// Steps of the recursion.
    #[arg(long, default_value_t = 200)]
    pub n_max: usize,
    /// Number of random draws per threshold alternative instead of a
    /// single trace.
    #[arg(long)]
    pub sweep: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Shoot,
    Rayleigh,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryArg {
    Left,
    Right,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExampleName {
    Ex61,
    Ex62,
    Rmk22,
    Rmk23,
    AnnulusTrivial,
    AnnulusN3,
}

impl ExampleName {
    pub fn preset(self) -> &'static str {
        match self {
            Self::Ex61 => "ex61",
            Self::Ex62 => "ex62",
            Self::Rmk22 => "rmk22",
            Self::Rmk23 => "rmk23",
            Self::AnnulusTrivial => "annulus-trivial",
            Self::AnnulusN3 => "annulus-n3",
        }
    }
}

/// Error that maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    use radial_plap::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<E>() {
        Some(E::InvalidWeight(_) | E::InvalidProblem(_) | E::InvalidParameter { .. } | E::Json(_) | E::Domain { .. }) => 2,
        _ => 1,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("RADIAL_PLAP_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n > 0 {
            // only fails if a pool already exists, which cannot happen this early
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let command_line: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(&cli, &command_line.join(" ")) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

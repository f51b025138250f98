//! Command-line front end for the `szego` binary.
//!
//! Every subcommand resolves a [`RunConfig`] (defaults, then `--config`
//! file, then flags), delegates to `szego_core`, and writes CSV or JSON
//! stamped with the crate version and a hash of the resolved config.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_complex, PotentialSpec, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(szego_core::Error),
    Io(String),
    /// validation suite ran and at least one criterion failed
    Acceptance(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Core(e) => e.exit_code(),
            CliError::Acceptance(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Acceptance(k) => write!(f, "{k} acceptance criteria failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<szego_core::Error> for CliError {
    fn from(e: szego_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "szego", version, about = "Reproducing kernels of weighted polynomial spaces: exact values, asymptotics and diagnostics")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// ginibre | radial | elliptic
    #[arg(long, global = true)]
    pub potential: Option<String>,
    /// radial profile: r2 | r4 | r2+r4
    #[arg(long, global = true)]
    pub profile: Option<String>,
    /// elliptic potential Q = a u² + b v²
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// single degree n (replaces the ladder)
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// comma-separated, strictly increasing list of n
    #[arg(long, global = true)]
    pub nlist: Option<String>,
    /// complex point, repeatable or ';'-separated (1.5, 2+i, -0.3-1.2i)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub z: Vec<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub w: Vec<String>,
    /// number of correction terms
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// minimum distance of zw̄ from 1
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// belt width constant
    #[arg(long = "M", global = true)]
    pub m_const: Option<f64>,
    /// boundary nodes for conformal data
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// native | extended
    #[arg(long, global = true)]
    pub precision: Option<String>,
    /// output directory (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key = value file; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// classification tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// curve tracing step
    #[arg(long, global = true)]
    pub step: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Region labels for a list of ζ
    Classify {
        /// CSV with columns re,im (header optional); falls back to --z
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Exterior expansion against the exact Ginibre kernel over the n ladder
    Expand,
    /// Kernel values by several routes with pairwise ratios
    Kernel {
        /// exact | asymptotic | tail | oracle | all
        #[arg(long, default_value = "all")]
        mode: String,
        /// basis JSON written by `szego oracle`
        #[arg(long)]
        basis: Option<PathBuf>,
    },
    /// Berezin density against the Gaussian belt model
    Berezin {
        #[arg(long, default_value_t = 64)]
        angular: usize,
        #[arg(long = "ell-points", default_value_t = 9)]
        ell_points: usize,
    },
    /// Boundary points of the droplet at level τ
    Droplet {
        /// comma-separated τ values
        #[arg(long, default_value = "1")]
        tau: String,
        #[arg(long, default_value_t = 256)]
        angular: usize,
    },
    /// Orthonormal basis dump as JSON
    Oracle {
        /// defaults to n − 1
        #[arg(long = "max-degree")]
        max_degree: Option<usize>,
        #[arg(long, default_value_t = 1)]
        refine: usize,
    },
    /// Loop-equation residuals as JSON
    Ward {
        /// ginibre | oracle
        #[arg(long, default_value = "ginibre")]
        source: String,
        #[arg(long = "fd-step")]
        fd_step: Option<f64>,
        #[arg(long, default_value_t = 1)]
        refine: usize,
    },
    /// Acceptance suite with a JSON report
    Validate {
        /// all | ginibre-exterior | ginibre | general | geometry | criterion number
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Plot data files
    Figures(commands::FigureArgs),
}

/// Parses argv (including the program name) and runs; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("szego: {e}");
            e.exit_code()
        }
    }
}

fn overrides(c: &Common) -> config::Overrides {
    config::Overrides {
        potential: c.potential.clone(),
        profile: c.profile.clone(),
        a: c.a,
        b: c.b,
        n: c.n,
        nlist: c.nlist.clone(),
        z: c.z.clone(),
        w: c.w.clone(),
        k: c.k,
        eta: c.eta,
        m_const: c.m_const,
        nodes: c.nodes,
        precision: c.precision.clone(),
        out: c.out.clone(),
        seed: c.seed,
        tol: c.tol,
        step: c.step,
    }
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(cli.common.config.as_deref(), &overrides(&cli.common))?;
    match cli.command {
        Command::Classify { points } => commands::classify(&cfg, points.as_deref()),
        Command::Expand => commands::expand(&cfg),
        Command::Kernel { mode, basis } => commands::kernel(&cfg, &mode, basis.as_deref()),
        Command::Berezin { angular, ell_points } => commands::berezin(&cfg, angular, ell_points),
        Command::Droplet { tau, angular } => commands::droplet(&cfg, &tau, angular),
        Command::Oracle { max_degree, refine } => commands::oracle(&cfg, max_degree, refine),
        Command::Ward { source, fd_step, refine } => commands::ward(&cfg, &source, fd_step, refine),
        Command::Validate { suite } => commands::validate(&cfg, &suite),
        Command::Figures(args) => commands::figures(&cfg, &args),
    }
}

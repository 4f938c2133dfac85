//! `hullvar`: run random-polytope experiments from TOML configs.
//!
//! Exit status is 0 on success, 1 for configuration errors and 2 when a run
//! fails.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "HULLVAR_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "hullvar", version, about = "Random polytopes in smooth convex bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set grid.points=5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Worker threads; 1 gives a serial reference run.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (default: $HULLVAR_OUT_DIR, then `results`).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Root seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

impl Common {
    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("results"))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample one point set, build its hull and score the vertices.
    SampleHull,
    /// Variance sweep over intensities or sample sizes, with scaling fit.
    Sweep,
    /// Paraboloid scenes, mean score profiles and the rescaled intensity check.
    Paraboloid,
    /// Limit variance density by the window and/or correlation routes.
    Sigma2,
    /// Affine surface area of a body (and weighted integrals of a test function).
    Asa {
        /// Body specification, e.g. `ellipsoid:2,1,1`.
        #[arg(long)]
        body: String,
        /// Test function for the weighted integrals, e.g. `bump:1,0;0.5`.
        #[arg(long)]
        g: Option<String>,
    },
    /// Binomial versus Poisson variance on coupled samples.
    Depoisson,
    /// Volume variance against the vertex-count identity.
    Volvar,
    /// Weighted score measures against the paraboloid constants.
    Th2check,
    /// Re-render the fit and plots of a finished sweep.
    Report {
        /// JSON report written by `sweep`.
        input: PathBuf,
    },
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
}

fn dispatch(command: &Command, common: &Common) -> hullvar::Result<()> {
    match command {
        Command::SampleHull => commands::sample_hull(common),
        Command::Sweep => commands::sweep(common),
        Command::Paraboloid => commands::paraboloid(common),
        Command::Sigma2 => commands::sigma2(common),
        Command::Asa { body, g } => commands::asa(common, body, g.as_deref()),
        Command::Depoisson => commands::depoisson(common),
        Command::Volvar => commands::volvar(common),
        Command::Th2check => commands::th2check(common),
        Command::Report { input } => commands::report(common, input),
    }
}

fn run_with_threads(cli: &Cli) -> hullvar::Result<()> {
    match cli.common.threads {
        Some(0) => Err(hullvar::Error::Config("--threads must be at least 1".into())),
        Some(1) => hullvar::par::serial(|| dispatch(&cli.command, &cli.common)),
        #[cfg(feature = "parallel")]
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| hullvar::Error::Runtime(e.to_string()))?
            .install(|| dispatch(&cli.command, &cli.common)),
        _ => dispatch(&cli.command, &cli.common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.common.verbose);
    match run_with_threads(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

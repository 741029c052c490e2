//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{cmd_bounds, cmd_claims, cmd_ic_audit, cmd_plot, cmd_run, cmd_scaling};
use crate::config::{parse_config, resolve, ConfigFile, Overrides, SEED_ENV};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "selfish-bandit", version, about = "Monte Carlo lab for prediction with selfish experts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run trials and write per-trial CSV rows plus a JSON summary.
    Run(CommonArgs),
    /// Run several horizons and fit the log-log regret slope.
    Scaling(CommonArgs),
    /// Check the claim statistics on the lower-bound sequence.
    Claims(CommonArgs),
    /// Audit incentive compatibility by exact best responses.
    IcAudit(CommonArgs),
    /// Evaluate the closed-form bounds for the configured parameters.
    Bounds(CommonArgs),
    /// Draw SVG plots from a run CSV.
    Plot(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON manifest; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Learner (hedge, mwu, wsu, wsu-ux, exp3); repeatable.
    #[arg(long = "learner", value_delimiter = ',')]
    pub learners: Vec<String>,
    /// lower-bound, trivial or bernoulli:p1,p2[@seed].
    #[arg(long)]
    pub env: Option<String>,
    /// Horizon; repeatable.
    #[arg(long = "T", value_delimiter = ',')]
    pub horizons: Vec<u64>,
    /// Number or policy such as "eta=T^-2/3", "exp3-default", "upper-bound-tuned".
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
    /// Number or policy such as "gamma=T^-1/3".
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base seed; the SELFISH_BANDIT_SEED variable applies when this is absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Random configurations per audit (ic-audit).
    #[arg(long)]
    pub configs: Option<usize>,
    /// Report grid points (ic-audit).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Run CSV to plot (plot); defaults to OUT_DIR/run.csv.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Path CSV to plot (plot); defaults to pi1_path.csv next to the run CSV.
    #[arg(long)]
    pub path_csv: Option<PathBuf>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            learners: self.learners.clone(),
            env: self.env.clone(),
            horizons: self.horizons.clone(),
            eta: self.eta.clone(),
            gamma: self.gamma.clone(),
            trials: self.trials,
            seed: self.seed,
            parallelism: self.parallelism,
            out_dir: self.out_dir.clone(),
            configs: self.configs,
            grid: self.grid,
            csv: self.csv.clone(),
            path_csv: self.path_csv.clone(),
        }
    }
}

/// Runs a parsed command line; returns the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let (Command::Run(args)
    | Command::Scaling(args)
    | Command::Claims(args)
    | Command::IcAudit(args)
    | Command::Bounds(args)
    | Command::Plot(args)) = &cli.command;
    let file = match &args.config {
        Some(path) => parse_config(
            &std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?,
        )?,
        None => ConfigFile::default(),
    };
    let seed_env = std::env::var(SEED_ENV).ok();
    let cfg = resolve(&file, &args.overrides(), seed_env.as_deref())?;
    match &cli.command {
        Command::Run(_) => cmd_run(&cfg),
        Command::Scaling(_) => cmd_scaling(&cfg),
        Command::Claims(_) => cmd_claims(&cfg),
        Command::IcAudit(_) => cmd_ic_audit(&cfg),
        Command::Bounds(_) => cmd_bounds(&cfg),
        Command::Plot(_) => cmd_plot(&cfg),
    }
}

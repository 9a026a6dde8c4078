//! `vcrkit` command-line frontend.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BuildTrajArgs, DegradeArgs, EvalArgs, Mask2BoxArgs, RewardsArgs, ToolCmdArgs};

#[derive(Parser)]
#[command(
    name = "vcrkit",
    version,
    about = "Forgery-forensics toolkit: tools, rewards, corpus building, evaluation"
)]
struct Cli {
    /// TOML file with one table per subcommand; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one forensic tool on an image and write its output PNG.
    Tool(ToolCmdArgs),
    /// Score completions against ground truth and compute group advantages.
    Rewards(RewardsArgs),
    /// Select tools per sample and synthesize the trajectory corpus.
    BuildTraj(BuildTrajArgs),
    /// Compute detection, localization or box metrics per dataset.
    Eval(EvalArgs),
    /// Apply a degradation sweep to an image tree.
    Degrade(DegradeArgs),
    /// Extract ground-truth boxes from binary masks.
    Mask2box(Mask2BoxArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = cli.config.as_deref().map(config::load).transpose()?;
    let cfg = cfg.as_ref();
    match cli.command {
        Command::Tool(a) => commands::tool::run(config::merge(a, cfg, "tool")?),
        Command::Rewards(a) => commands::rewards::run(config::merge(a, cfg, "rewards")?),
        Command::BuildTraj(a) => commands::build::run(config::merge(a, cfg, "build-traj")?),
        Command::Eval(a) => commands::eval::run(config::merge(a, cfg, "eval")?),
        Command::Degrade(a) => commands::degrade::run(config::merge(a, cfg, "degrade")?),
        Command::Mask2box(a) => commands::mask2box::run(config::merge(a, cfg, "mask2box")?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

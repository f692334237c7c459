//! `time4-lab`: certify the swap theorems, drive the update simulator, and inspect
//! scheduled-bundle wire messages.

pub mod codec;
pub mod figures;
pub mod output;
pub mod prove;
pub mod scenario;
pub mod units;
pub mod video;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use prove::ProveArgs;

/// Exit codes shared by every subcommand.
pub mod exit {
    pub const OK: u8 = 0;
    /// `prove`: the claim was refuted. Other commands: the run failed.
    pub const REFUTED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const GUARD_EXCEEDED: u8 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "time4-lab", version, about = "Flow-swap theorems, timed-update simulation and bundle codec tooling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play a swap-forcing source strategy and certify the forced swap.
    Prove(ProveArgs),
    /// Run a scenario file or a figure preset and write CSV.
    Simulate(SimulateArgs),
    /// Sample the signed scheduling error of the video-swap microbenchmark.
    Video(video::VideoArgs),
    /// Encode or decode scheduled-bundle messages as hex.
    Codec(codec::CodecArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Base seed; runs use seed, seed+1, ...
    #[arg(long, env = "TIME4_LAB_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (JSON, `"version": 1`).
    #[arg(required_unless_present = "figure", conflicts_with = "figure")]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_parser = ["6a", "6b", "6c", "6d", "7", "8a", "8b"])]
    pub figure: Option<String>,
    /// Seeds per grid point; overrides the scenario's `seeds`.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Switch count for the single-n presets.
    #[arg(long)]
    pub n: Option<usize>,
    /// One row per grid point with mean and standard deviation instead of one per seed.
    #[arg(long)]
    pub summary: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Runs one parsed command, writing results to `stdout` (or `--out`) and diagnostics to stderr.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Prove(args) => return prove::run(&args, stdout),
        Command::Simulate(args) => simulate(&args, stdout),
        Command::Video(args) => video::run(&args, stdout),
        Command::Codec(args) => return codec::run(&args, stdout),
    };
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<UsageError>() {
                Some(_) => exit::USAGE,
                None => exit::REFUTED,
            }
        }
    }
}

/// Bad input rather than a failed run.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let job = match (&args.figure, &args.scenario) {
        (Some(fig), _) => figures::preset(fig, args.n, args.seeds)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            scenario::load(&text, path.display().to_string().as_str())?.into_job(args.seeds)?
        }
        (None, None) => return Err(usage("give a scenario file or --figure")),
    };
    let rows = output::with_jobs(args.run.jobs, || job.run(args.run.seed))??;
    output::emit(args.run.out.as_deref(), stdout, |w| {
        if args.summary {
            output::write_csv(w, &time4_netsim::summarize(&rows))
        } else {
            output::write_csv(w, &rows)
        }
    })
}

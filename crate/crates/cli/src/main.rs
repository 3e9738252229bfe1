//! `collider` — command-line interface to the digit-sum collision
//! toolkit.
//!
//! Exit codes: 0 on success, 1 on domain errors (search failure,
//! violated precondition, resource limit), 2 on usage errors.

mod cmd;
mod output;

use clap::{Args, Parser, Subcommand};

/// Fixed default seed; every randomized subcommand is reproducible
/// unless a different seed is passed.
pub const DEFAULT_SEED: u64 = 0x5EED_C011_1DE5;

#[derive(Parser)]
#[command(
    name = "collider",
    about = "Enumerate, analyze, and manufacture collisions of binary and ternary digit sums",
    version
)]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

/// Global knobs shared by all subcommands.
#[derive(Args, Clone)]
pub struct RunConfig {
    /// RNG seed (fixed default for reproducibility, never time-based).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "COLLIDER_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Digit expansion and digit sum of a single integer.
    Digits(cmd::DigitsArgs),
    /// Distribution tables, characteristic function, moments, bounds.
    #[command(subcommand)]
    Dist(cmd::DistCommand),
    /// Build a shift family (and progression, when N is given).
    Construct(cmd::ConstructArgs),
    /// Enumerate collisions below a limit.
    Enum(cmd::EnumArgs),
    /// Search for exact zero-offset patterns of f in a sliding window.
    Patterns(cmd::PatternsArgs),
    /// Manufacture a verified collision with a replayable certificate.
    Forge(cmd::ForgeArgs),
    /// Exact collision counts at checkpoints.
    Count(cmd::CountArgs),
    /// Monte-Carlo and exact verification experiments.
    #[command(subcommand)]
    Analyze(cmd::AnalyzeCommand),
    /// Diff the enumerated sequence against a local OEIS b-file.
    CompareBfile(cmd::CompareBfileArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Digits(args) => cmd::digits(&cli.run, args),
        Command::Dist(args) => cmd::dist(&cli.run, args),
        Command::Construct(args) => cmd::construct(&cli.run, args),
        Command::Enum(args) => cmd::enumerate(&cli.run, args),
        Command::Patterns(args) => cmd::patterns(&cli.run, args),
        Command::Forge(args) => cmd::forge(&cli.run, args),
        Command::Count(args) => cmd::count(&cli.run, args),
        Command::Analyze(args) => cmd::analyze(&cli.run, args),
        Command::CompareBfile(args) => cmd::compare_bfile(&cli.run, args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}

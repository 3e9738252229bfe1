//! Subcommand argument types and handlers.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;

use collider_core::analysis;
use collider_core::collider::{self, CollisionKind, ForgeInput};
use collider_core::constructor::{
    make_params_manual, make_params_paper, Params, ProgressionSpec, ShiftFamily,
};
use collider_core::digits::{self, BigNat, DigitString};
use collider_core::distribution::{self, OmegaMode, PhiMode};
use collider_core::{Error, Result};

use crate::output::{emit_json, writer};
use crate::RunConfig;

/// Accepts plain decimal, hex (`0x...`), and power expressions
/// (`2^2000`, `10^6`).
pub fn parse_bignat_expr(s: &str) -> std::result::Result<BigNat, String> {
    let s = s.trim();
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        return BigNat::parse_bytes(hex.as_bytes(), 16)
            .ok_or_else(|| format!("invalid hex integer: {s}"));
    }
    if let Some((base, exp)) = s.split_once('^') {
        let base: u32 = base
            .trim()
            .parse()
            .map_err(|_| format!("invalid power base in {s:?}"))?;
        let exp: u32 = exp
            .trim()
            .parse()
            .map_err(|_| format!("invalid exponent in {s:?}"))?;
        if base < 2 {
            return Err("power base must be at least 2".into());
        }
        return Ok(BigNat::from(base).pow(exp));
    }
    BigNat::parse_bytes(s.as_bytes(), 10).ok_or_else(|| format!("invalid integer: {s}"))
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidInput(format!("invalid integer {part:?} in list")))
        })
        .collect()
}

// ---------------------------------------------------------------- digits

#[derive(Args)]
pub struct DigitsArgs {
    /// The integer to expand (decimal, hex, or `b^e`).
    #[arg(value_parser = parse_bignat_expr)]
    n: BigNat,
    #[arg(long, default_value_t = 2)]
    base: u32,
}

#[derive(Serialize)]
struct DigitsOutput {
    #[serde(with = "collider_core::serde_util::bignat")]
    n: BigNat,
    base: u32,
    digits: String,
    digit_sum: u64,
}

pub fn digits(run: &RunConfig, args: DigitsArgs) -> Result<()> {
    let ds = DigitString::digits_of(&args.n, args.base)?;
    emit_json(
        run.output.as_deref(),
        &DigitsOutput {
            digit_sum: ds.digit_sum(),
            digits: ds.to_string(),
            n: args.n,
            base: args.base,
        },
    )
}

// ---------------------------------------------------------------- dist

#[derive(Subcommand)]
pub enum DistCommand {
    /// Exact distribution table of truncated digit-sum differences.
    Phi(PhiArgs),
    /// Characteristic function value at theta.
    Omega(OmegaArgs),
    /// Exact first and second moments.
    Moments(MomentsArgs),
    /// Bound checks (second moment sweep, block-decay bound).
    #[command(subcommand)]
    Bounds(BoundsCommand),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PhiModeArg {
    Recurrence,
    Bruteforce,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum OmegaModeArg {
    Recurrence,
    Direct,
}

#[derive(Args)]
pub struct PhiArgs {
    #[arg(long, value_parser = parse_bignat_expr)]
    t: BigNat,
    #[arg(long = "L")]
    level: u32,
    #[arg(long, value_enum, default_value = "recurrence")]
    mode: PhiModeArg,
}

#[derive(Args)]
pub struct OmegaArgs {
    #[arg(long, value_parser = parse_bignat_expr)]
    t: BigNat,
    #[arg(long)]
    theta: f64,
    #[arg(long = "L")]
    level: u32,
    #[arg(long, value_enum, default_value = "recurrence")]
    mode: OmegaModeArg,
}

#[derive(Args)]
pub struct MomentsArgs {
    #[arg(long, value_parser = parse_bignat_expr)]
    t: BigNat,
    #[arg(long = "L")]
    level: u32,
}

#[derive(Subcommand)]
pub enum BoundsCommand {
    /// Exhaustive check of m2(t, nu) <= 2 nu over all t < 2^nu.
    M2 {
        #[arg(long)]
        nu: u32,
    },
    /// |omega_t(theta, L)| against the block-count decay bound.
    OmegaBlock {
        #[arg(long, value_parser = parse_bignat_expr)]
        t: BigNat,
        #[arg(long)]
        theta: f64,
        #[arg(long = "L")]
        level: u32,
    },
}

#[derive(Serialize)]
struct MomentsOutput {
    #[serde(with = "collider_core::serde_util::bignat")]
    t: BigNat,
    #[serde(rename = "L")]
    level: u32,
    m1: String,
    m2: String,
}

pub fn dist(run: &RunConfig, command: DistCommand) -> Result<()> {
    let output = run.output.as_deref();
    match command {
        DistCommand::Phi(args) => {
            let mode = match args.mode {
                PhiModeArg::Recurrence => PhiMode::Recurrence,
                PhiModeArg::Bruteforce => PhiMode::BruteForce,
            };
            let table = distribution::phi_table(&args.t, args.level, mode)?;
            emit_json(output, &table)
        }
        DistCommand::Omega(args) => {
            let mode = match args.mode {
                OmegaModeArg::Recurrence => OmegaMode::Recurrence,
                OmegaModeArg::Direct => OmegaMode::Direct,
            };
            let query =
                distribution::CharacteristicQuery::evaluate(&args.t, args.theta, args.level, mode);
            emit_json(output, &query)
        }
        DistCommand::Moments(args) => {
            let pair = distribution::moments(&args.t, args.level);
            emit_json(
                output,
                &MomentsOutput {
                    t: args.t,
                    level: args.level,
                    m1: pair.m1.to_string(),
                    m2: pair.m2.to_string(),
                },
            )
        }
        DistCommand::Bounds(BoundsCommand::M2 { nu }) => {
            let report = distribution::check_m2_bound(nu)?;
            emit_json(output, &report)
        }
        DistCommand::Bounds(BoundsCommand::OmegaBlock { t, theta, level }) => {
            let check = distribution::check_omega_block_bound(&t, theta, level)?;
            emit_json(output, &check)
        }
    }
}

// ---------------------------------------------------------------- construct

#[derive(Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub eta: Option<u64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long = "J")]
    pub j_max: Option<u64>,
    /// Left endpoint N of the target window [N, 2N).
    #[arg(long = "N", value_parser = parse_bignat_expr)]
    pub n_lo: Option<BigNat>,
    /// Shorthand for N = 2^bits.
    #[arg(long, conflicts_with = "n_lo")]
    pub bits: Option<u64>,
    /// Derive eta, m, J from N by the asymptotic scheme instead of
    /// taking them verbatim.
    #[arg(long)]
    pub paper: bool,
    /// Epsilon knob for the asymptotic scheme.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Anchor-search budget (candidate draws).
    #[arg(long, default_value_t = collider::DEFAULT_BUILD_BUDGET)]
    pub budget: u64,
}

impl ConstructArgs {
    fn window_start(&self) -> Option<BigNat> {
        self.n_lo
            .clone()
            .or_else(|| self.bits.map(digits::pow2))
    }

    pub fn params(&self) -> Result<Params> {
        if self.paper {
            let n = self.window_start().ok_or_else(|| {
                Error::InvalidParams("--paper requires --N or --bits".into())
            })?;
            make_params_paper(&n, self.epsilon)
        } else {
            match (self.eta, self.m, self.j_max) {
                (Some(eta), Some(m), Some(j)) => make_params_manual(eta, m, j),
                _ => Err(Error::InvalidParams(
                    "manual construction requires --eta, --m, and --J".into(),
                )),
            }
        }
    }

    pub fn build(&self, seed: u64) -> Result<ShiftFamily> {
        ShiftFamily::build(&self.params()?, seed, self.budget)
    }
}

pub fn construct(run: &RunConfig, args: ConstructArgs) -> Result<()> {
    let family = args.build(run.seed)?;
    match args.window_start() {
        Some(n_lo) => {
            let spec = ProgressionSpec::new(family, n_lo)?;
            emit_json(run.output.as_deref(), &spec)
        }
        None => emit_json(run.output.as_deref(), &family),
    }
}

// ---------------------------------------------------------------- enum

#[derive(Clone, Copy, ValueEnum)]
pub enum EnumFormat {
    Jsonl,
    Csv,
    Bfile,
    Pretty,
}

#[derive(Args)]
pub struct EnumArgs {
    #[arg(long, value_parser = parse_bignat_expr)]
    limit: BigNat,
    /// Emit almost-collisions (s2 - s3 in {0, 1}) instead of exact
    /// ones.
    #[arg(long)]
    almost: bool,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: EnumFormat,
}

pub fn enumerate(run: &RunConfig, args: EnumArgs) -> Result<()> {
    let kind = if args.almost {
        CollisionKind::Almost
    } else {
        CollisionKind::Exact
    };
    let mut out = writer(run.output.as_deref())?;
    if matches!(args.format, EnumFormat::Csv) {
        writeln!(out, "n,s2,s3,kind")?;
    }
    let mut index = 0u64;
    let mut io_error: Option<std::io::Error> = None;
    collider::for_each_collision(&args.limit, kind, run.threads, |record| {
        if io_error.is_some() {
            return;
        }
        index += 1;
        let line = match args.format {
            EnumFormat::Jsonl => serde_json::to_string(&record).expect("record serializes"),
            EnumFormat::Csv => format!(
                "{},{},{},{}",
                record.n,
                record.s2,
                record.s3,
                kind_name(record.kind)
            ),
            EnumFormat::Bfile => format!("{} {}", index, record.n),
            EnumFormat::Pretty => format!(
                "{:>12}  s2 = s3 = {}{}",
                record.n.to_string(),
                record.s2,
                if record.s2 == record.s3 {
                    String::new()
                } else {
                    format!(" (s3 = {})", record.s3)
                }
            ),
        };
        if let Err(e) = writeln!(out, "{line}") {
            io_error = Some(e);
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    out.flush()?;
    Ok(())
}

fn kind_name(kind: CollisionKind) -> &'static str {
    match kind {
        CollisionKind::Exact => "exact",
        CollisionKind::Almost => "almost",
    }
}

// ---------------------------------------------------------------- patterns

#[derive(Args)]
pub struct PatternsArgs {
    #[arg(long, value_parser = parse_bignat_expr)]
    limit: BigNat,
    #[arg(long)]
    window: u64,
    /// Comma-separated offsets that must be exactly the zero set of f
    /// in the window, e.g. `0,5,6,8,23`.
    #[arg(long)]
    offsets: String,
}

#[derive(Serialize)]
struct PatternsOutput {
    window: u64,
    offsets: Vec<u64>,
    matches: Vec<String>,
}

pub fn patterns(run: &RunConfig, args: PatternsArgs) -> Result<()> {
    let offsets: BTreeSet<u64> = parse_u64_list(&args.offsets)?.into_iter().collect();
    let matches = collider::find_patterns(&args.limit, args.window, &offsets)?;
    emit_json(
        run.output.as_deref(),
        &PatternsOutput {
            window: args.window,
            offsets: offsets.into_iter().collect(),
            matches: matches.iter().map(|n| n.to_string()).collect(),
        },
    )
}

// ---------------------------------------------------------------- forge

#[derive(Args)]
pub struct ForgeArgs {
    #[command(flatten)]
    construct: ConstructArgs,
    /// Use a previously constructed family (JSON file, `-` for
    /// stdin) instead of building one.
    #[arg(long)]
    family: Option<PathBuf>,
    /// Sampling budget (progression elements to try).
    #[arg(long = "sample-budget", default_value_t = 100_000)]
    sample_budget: u64,
}

pub fn forge(run: &RunConfig, args: ForgeArgs) -> Result<()> {
    let n_lo = args
        .construct
        .window_start()
        .ok_or_else(|| Error::InvalidParams("forge requires --N or --bits".into()))?;
    let family = match &args.family {
        Some(path) => Some(read_family(path)?),
        None => None,
    };
    let cert = match &family {
        Some(f) => collider::forge_collision(
            ForgeInput::Family(f),
            &n_lo,
            args.sample_budget,
            run.seed,
            run.threads,
        )?,
        None => {
            let params = args.construct.params()?;
            collider::forge_collision(
                ForgeInput::Params(&params),
                &n_lo,
                args.sample_budget,
                run.seed,
                run.threads,
            )?
        }
    };
    emit_json(run.output.as_deref(), &cert)
}

fn read_family(path: &PathBuf) -> Result<ShiftFamily> {
    let text = if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin().lock(), &mut buf)?;
        buf
    } else {
        std::fs::read_to_string(path)?
    };
    // Accept either a bare family or a full progression document.
    if let Ok(spec) = serde_json::from_str::<ProgressionSpec>(&text) {
        return Ok(spec.family);
    }
    serde_json::from_str::<ShiftFamily>(&text)
        .map_err(|e| Error::InvalidInput(format!("cannot parse family JSON: {e}")))
}

// ---------------------------------------------------------------- count

#[derive(Args)]
pub struct CountArgs {
    #[arg(long, value_parser = parse_bignat_expr)]
    limit: BigNat,
    /// Comma-separated increasing checkpoints, e.g. `2^20,2^24`.
    #[arg(long)]
    checkpoints: String,
}

#[derive(Serialize)]
struct CountOutput {
    counts: Vec<CountEntry>,
}

#[derive(Serialize)]
struct CountEntry {
    #[serde(rename = "N")]
    checkpoint: String,
    count: u64,
}

pub fn count(run: &RunConfig, args: CountArgs) -> Result<()> {
    let checkpoints: Vec<BigNat> = args
        .checkpoints
        .split(',')
        .map(|s| parse_bignat_expr(s).map_err(Error::InvalidInput))
        .collect::<Result<_>>()?;
    let counts = collider::count_collisions(&args.limit, &checkpoints, run.threads)?;
    emit_json(
        run.output.as_deref(),
        &CountOutput {
            counts: counts
                .into_iter()
                .map(|(n, count)| CountEntry {
                    checkpoint: n.to_string(),
                    count,
                })
                .collect(),
        },
    )
}

// ---------------------------------------------------------------- analyze

#[derive(Subcommand)]
pub enum AnalyzeCommand {
    /// Histogram of f along the rarefied progression.
    Concentration(ConcentrationArgs),
    /// Share of progression elements with f = 0 mod m.
    Fairshare(FairshareArgs),
    /// Direct class count vs. exponential-sum reconstruction.
    Orthogonality(OrthogonalityArgs),
    /// Exact binomial tail vs. the sub-Gaussian bound.
    Hoeffding(HoeffdingArgs),
    /// Joint residue counts of (s2 mod m1, s3 mod m2).
    Gelfond(GelfondArgs),
    /// Least-squares density exponent through count checkpoints.
    Fit(FitArgs),
}

#[derive(Args)]
pub struct ConcentrationArgs {
    #[command(flatten)]
    construct: ConstructArgs,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// Deliberate rarefaction offset added to the chosen zeta.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    zeta_offset: i64,
}

#[derive(Args)]
pub struct FairshareArgs {
    #[command(flatten)]
    construct: ConstructArgs,
    #[arg(long = "mod")]
    modulus: u64,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
}

#[derive(Args)]
pub struct OrthogonalityArgs {
    /// Class representative L (b2 is floor(L / mod2)).
    #[arg(long = "l-value", value_parser = parse_bignat_expr)]
    class_rep: BigNat,
    #[arg(long, value_parser = parse_bignat_expr)]
    mod2: BigNat,
    #[arg(long, value_parser = parse_bignat_expr)]
    mod3: BigNat,
    #[arg(long)]
    i_lo: u64,
    #[arg(long)]
    i_hi: u64,
    #[arg(long)]
    m: u64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    t: i64,
}

#[derive(Args)]
pub struct HoeffdingArgs {
    #[arg(long = "t-len")]
    t_len: u32,
    #[arg(long)]
    threshold: f64,
}

#[derive(Args)]
pub struct GelfondArgs {
    #[arg(long, value_parser = parse_bignat_expr)]
    limit: BigNat,
    #[arg(long)]
    m1: u64,
    #[arg(long)]
    m2: u64,
}

#[derive(Args)]
pub struct FitArgs {
    /// Comma-separated `N:count` pairs, e.g. `2^20:89,2^24:1378`.
    #[arg(long)]
    points: String,
}

fn spec_with_offset(args: &ConstructArgs, seed: u64, zeta_offset: i64) -> Result<ProgressionSpec> {
    let n_lo = args
        .window_start()
        .ok_or_else(|| Error::InvalidParams("analysis requires --N or --bits".into()))?;
    let family = args.build(seed)?;
    let spec = ProgressionSpec::new(family, n_lo)?;
    if zeta_offset == 0 {
        return Ok(spec);
    }
    let shifted = (spec.zeta as i64 + zeta_offset).max(0) as u64;
    ProgressionSpec::with_zeta(spec.family, spec.n_lo, shifted)
}

pub fn analyze(run: &RunConfig, command: AnalyzeCommand) -> Result<()> {
    let output = run.output.as_deref();
    match command {
        AnalyzeCommand::Concentration(args) => {
            let spec = spec_with_offset(&args.construct, run.seed, args.zeta_offset)?;
            let report = analysis::sample_concentration(&spec, args.samples, run.seed, run.threads)?;
            emit_json(output, &report)
        }
        AnalyzeCommand::Fairshare(args) => {
            let spec = spec_with_offset(&args.construct, run.seed, 0)?;
            let report =
                analysis::fair_share(&spec, args.modulus, args.samples, run.seed, run.threads)?;
            emit_json(output, &report)
        }
        AnalyzeCommand::Orthogonality(args) => {
            let check = analysis::exp_sum_orthogonality(
                &args.class_rep,
                &args.mod2,
                &args.mod3,
                args.i_lo,
                args.i_hi,
                args.m,
                args.t,
            )?;
            emit_json(output, &check)
        }
        AnalyzeCommand::Hoeffding(args) => {
            let check = analysis::hoeffding_tail(args.t_len, args.threshold)?;
            emit_json(output, &check)
        }
        AnalyzeCommand::Gelfond(args) => {
            let report = analysis::gelfond_counts(&args.limit, args.m1, args.m2, run.threads)?;
            emit_json(output, &report)
        }
        AnalyzeCommand::Fit(args) => {
            let mut points = Vec::new();
            for pair in args.points.split(',') {
                let (n, count) = pair.split_once(':').ok_or_else(|| {
                    Error::InvalidInput(format!("expected N:count, got {pair:?}"))
                })?;
                let n = parse_bignat_expr(n).map_err(Error::InvalidInput)?;
                let count: u64 = count
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad count in {pair:?}")))?;
                points.push((n, count));
            }
            let fit = analysis::fit_exponent(&points)?;
            emit_json(output, &fit)
        }
    }
}

// ---------------------------------------------------------------- compare-bfile

#[derive(Args)]
pub struct CompareBfileArgs {
    /// Local b-file (lines `index value`, `#` comments allowed).
    #[arg(long)]
    file: PathBuf,
    /// Compare all terms below this bound.
    #[arg(long, value_parser = parse_bignat_expr)]
    limit: BigNat,
}

pub fn compare_bfile(run: &RunConfig, args: CompareBfileArgs) -> Result<()> {
    let reader = BufReader::new(File::open(&args.file)?);
    let report = collider::compare_bfile(reader, &args.limit, run.threads)?;
    let agrees = report.agrees();
    emit_json(run.output.as_deref(), &report)?;
    if !agrees {
        // diff-style: differences are a nonzero exit.
        std::process::exit(1);
    }
    Ok(())
}

//! claimgate: is a reported outperformance claim likely to be false?
//!
//! Subcommands:
//!   check-cls   one accuracy comparison
//!   check-seg   one mean-DSC comparison
//!   corpus      batch analysis of an extracted-comparisons CSV
//!   grid        (test size x delta) probability grid, CSV and optional SVG
//!   required-n  minimum test-set size reaching a target probability
//!   congruence  empirical congruence from paired per-image outputs
//!
//! Exit codes: 0 success (degenerate records are flagged, not fatal),
//! 2 usage or validation error, 1 internal error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use claimgate::{PresetQuantile, SdSource, Task};

#[derive(Parser)]
#[command(name = "claimgate", version, about = "Probability that a reported model-outperformance claim is false")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probability of false claims for one accuracy comparison.
    CheckCls(CheckClsArgs),
    /// Probability of false claims for one mean-DSC comparison.
    CheckSeg(CheckSegArgs),
    /// Analyze a corpus CSV: per-record estimates, summary, threshold curves.
    Corpus(CorpusArgs),
    /// Probability grid over test sizes and performance deltas.
    Grid(GridArgs),
    /// Smallest test-set size with probability of false claims at or below a target.
    RequiredN(RequiredNArgs),
    /// Empirical model congruence from a paired-output CSV (`id,a,b`).
    Congruence(CongruenceArgs),
}

/// Sampling configuration shared by the stochastic commands.
#[derive(Args, Clone, Copy)]
struct RunOpts {
    /// RNG seed (CLAIMGATE_SEED overrides the default; the flag wins over both)
    #[arg(long, env = "CLAIMGATE_SEED", default_value_t = 42)]
    seed: u64,
    /// Monte Carlo draw count per estimate
    #[arg(long, default_value_t = 200_000)]
    k: u64,
}

/// SD imputation knobs shared by the segmentation-facing commands.
#[derive(Args, Clone, Copy)]
struct SdModelOpts {
    /// Coefficient c of the imputation s = c * sqrt(mean (1 - mean))
    #[arg(long, default_value_t = 0.4)]
    sd_coef: f64,
    /// Prediction-interval lower-quartile multiplier
    #[arg(long, default_value_t = 0.7)]
    pi_q1: f64,
    /// Prediction-interval upper-quartile multiplier
    #[arg(long, default_value_t = 1.3)]
    pi_q3: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    Unit,
    Percent,
}

impl Scale {
    fn label(&self) -> &'static str {
        match self {
            Scale::Unit => "unit",
            Scale::Percent => "percent",
        }
    }

    fn normalize(&self, v: f64) -> f64 {
        match self {
            Scale::Unit => v,
            Scale::Percent => v / 100.0,
        }
    }
}

/// `median`, `q1`, `q3`, or an explicit numeric congruence value.
#[derive(Clone, Copy, Debug)]
enum CongruenceArg {
    Preset(PresetQuantile),
    Value(f64),
}

impl CongruenceArg {
    fn label(&self) -> String {
        match self {
            CongruenceArg::Preset(q) => q.label().to_string(),
            CongruenceArg::Value(v) => v.to_string(),
        }
    }
}

impl FromStr for CongruenceArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "median" => Ok(CongruenceArg::Preset(PresetQuantile::Median)),
            "q1" => Ok(CongruenceArg::Preset(PresetQuantile::Q1)),
            "q3" => Ok(CongruenceArg::Preset(PresetQuantile::Q3)),
            other => other
                .parse::<f64>()
                .map(CongruenceArg::Value)
                .map_err(|_| format!("expected `median`, `q1`, `q3`, or a number, got `{other}`")),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Classification,
    Segmentation,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Classification => Task::Classification,
            TaskArg::Segmentation => Task::Segmentation,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ImputeVariant {
    Point,
    Q1,
    Q3,
}

impl ImputeVariant {
    fn source(&self) -> SdSource {
        match self {
            ImputeVariant::Point => SdSource::ImputedPoint,
            ImputeVariant::Q1 => SdSource::ImputedQ1,
            ImputeVariant::Q3 => SdSource::ImputedQ3,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SdSourceArg {
    Reported,
    ImputedPoint,
    ImputedQ1,
    ImputedQ3,
}

impl From<SdSourceArg> for SdSource {
    fn from(s: SdSourceArg) -> SdSource {
        match s {
            SdSourceArg::Reported => SdSource::Reported,
            SdSourceArg::ImputedPoint => SdSource::ImputedPoint,
            SdSourceArg::ImputedQ1 => SdSource::ImputedQ1,
            SdSourceArg::ImputedQ3 => SdSource::ImputedQ3,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetsArg {
    Median,
    All,
}

#[derive(Args)]
struct CheckClsArgs {
    /// Test-set size
    #[arg(long)]
    n: u64,
    /// Reported accuracy of the first-ranked method
    #[arg(long)]
    acc_a: f64,
    /// Reported accuracy of the second-ranked method
    #[arg(long)]
    acc_b: f64,
    /// Congruence: preset name or explicit joint-correct proportion
    #[arg(long, default_value = "median")]
    congruence: CongruenceArg,
    /// Scale the accuracies are given on
    #[arg(long, value_enum, default_value_t = Scale::Unit)]
    scale: Scale,
    /// Round the implied disagreement counts to integers before forming the posterior
    #[arg(long)]
    round_counts: bool,
    /// Emit the report as JSON on stdout
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Args)]
struct CheckSegArgs {
    /// Test-set size
    #[arg(long)]
    n: u64,
    /// Reported mean DSC of the first-ranked method
    #[arg(long)]
    dsc_a: f64,
    /// Reported mean DSC of the second-ranked method
    #[arg(long)]
    dsc_b: f64,
    /// Reported per-image SD of method A (requires --sd-b)
    #[arg(long, requires = "sd_b", conflicts_with = "impute")]
    sd_a: Option<f64>,
    /// Reported per-image SD of method B (requires --sd-a)
    #[arg(long, requires = "sd_a", conflicts_with = "impute")]
    sd_b: Option<f64>,
    /// Impute SDs from the means instead of supplying them
    #[arg(long, value_enum)]
    impute: Option<ImputeVariant>,
    /// Congruence: preset name or explicit DSC correlation
    #[arg(long, default_value = "median")]
    congruence: CongruenceArg,
    /// Scale the DSC values (and reported SDs) are given on
    #[arg(long, value_enum, default_value_t = Scale::Unit)]
    scale: Scale,
    /// Emit the report as JSON on stdout
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    model: SdModelOpts,
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus CSV (schema: paper_id,task,split,n_test,metric_a,metric_b,sd_a,sd_b,metric_scale)
    input: PathBuf,
    /// Restrict the analysis to one task
    #[arg(long, value_enum)]
    task: Option<TaskArg>,
    /// Which congruence presets to compute threshold curves for
    #[arg(long, value_enum, default_value_t = PresetsArg::Median)]
    presets: PresetsArg,
    /// Comma-separated ascending probability cutoffs in (0, 0.5]
    #[arg(long, default_value = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5")]
    thresholds: String,
    /// Where the segmentation SDs come from
    #[arg(long, value_enum, default_value_t = SdSourceArg::ImputedPoint)]
    sd_source: SdSourceArg,
    /// Directory the report bundle is written into
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[command(flatten)]
    run: RunOpts,
    #[command(flatten)]
    model: SdModelOpts,
}

#[derive(Args)]
struct GridArgs {
    /// Task the grid is for
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Comma-separated ascending test-set sizes
    #[arg(long)]
    n_list: String,
    /// Comma-separated ascending performance deltas
    #[arg(long)]
    delta_list: String,
    /// Metric level of the second-ranked method
    #[arg(long, default_value_t = 0.8)]
    base: f64,
    /// Output CSV path
    #[arg(long, default_value = "grid.csv")]
    out: PathBuf,
    /// Also write an SVG heatmap here
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    run: RunOpts,
    #[command(flatten)]
    model: SdModelOpts,
}

#[derive(Args)]
struct RequiredNArgs {
    /// Task to plan for
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Performance delta to substantiate (> 0)
    #[arg(long)]
    delta: f64,
    /// Metric level of the second-ranked method
    #[arg(long, default_value_t = 0.8)]
    base: f64,
    /// Congruence: preset name or explicit value
    #[arg(long, default_value = "median")]
    congruence: CongruenceArg,
    /// Target probability of false claims in (0, 0.5)
    #[arg(long, default_value_t = 0.05)]
    target: f64,
    /// Give up above this test-set size
    #[arg(long, default_value_t = claimgate::DEFAULT_N_CAP)]
    cap: u64,
    /// Emit the report as JSON on stdout
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    run: RunOpts,
    #[command(flatten)]
    model: SdModelOpts,
}

#[derive(Args)]
struct CongruenceArgs {
    /// Paired-output CSV with header `id,a,b`
    input: PathBuf,
    /// How to interpret the columns: 0/1 correctness or DSC values
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Emit the report as JSON on stdout
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::CheckCls(args) => commands::check_cls(args),
        Command::CheckSeg(args) => commands::check_seg(args),
        Command::Corpus(args) => commands::corpus(args),
        Command::Grid(args) => commands::grid(args),
        Command::RequiredN(args) => commands::required_n(args),
        Command::Congruence(args) => commands::congruence(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("claimgate: {err}");
            match err {
                claimgate::Error::InternalInvariant(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

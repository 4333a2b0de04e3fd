//! Command-line surface. Every command serializes back into the run record,
//! so an artifact's `run.config` can be replayed verbatim.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use excerptlab::did::{ClusterBy, FixedEffects};
use excerptlab::panel::PopularityFlag;

#[derive(Debug, Parser)]
#[command(name = "excerptlab", version, about = "Excerpt informativeness measures and DiD estimators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Draw a synthetic panel with planted effects.
    Simulate(SimulateArgs),
    /// Pooled TWFE DiD, a popularity interaction, or a popularity subsample.
    Estimate(EstimateArgs),
    /// Leads and lags of treatment; writes a `k,estimate,lo95,hi95` table.
    EventStudy(EventStudyArgs),
    /// Effects by measured decile relative to a reference decile.
    DoseResponse(DoseArgs),
    /// Switch-period difference in mean changes.
    DidM(DidMArgs),
    /// Synthetic difference-in-differences.
    Sdid(SdidArgs),
    /// Locate an excerpt inside a full recording.
    Align(AlignArgs),
    /// Compressed length of every WAV file in a directory.
    MeasureRepetition(RepetitionArgs),
    /// Train a tokenizer and AR model, then score every WAV file in a directory.
    MeasurePerplexity(PerplexityArgs),
    /// Closed-form demand and comparative statics.
    Demand(DemandArgs),
    /// Re-run the command recorded in an output JSON.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PanelArgs {
    /// Long-format panel CSV.
    #[arg(long = "in", value_name = "CSV")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    /// First post-policy period; inferred from the `post` column when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub policy_period: Option<i64>,
    #[arg(long)]
    pub allow_unbalanced: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RegressionArgs {
    /// `cluster_id` or `unit_id`.
    #[arg(long, default_value = "cluster_id")]
    pub cluster: ClusterBy,
    /// Comma-separated subset of `unit,period,age`, or `none`.
    #[arg(long, default_value = "unit,period")]
    pub fe: FixedEffects,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// JSON simulation spec; omitted fields take their defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsample {
    Popular,
    Unpopular,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub panel: PanelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub regression: RegressionArgs,
    /// Interact treatment with `popular_unit` or `popular_artist`.
    #[arg(long)]
    pub moderator: Option<PopularityFlag>,
    /// Fit on one side of the moderator split instead of interacting.
    #[arg(long, value_enum, requires = "moderator")]
    pub subsample: Option<Subsample>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EventStudyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub panel: PanelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub regression: RegressionArgs,
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    pub reference: i64,
    #[arg(long, default_value_t = -9, allow_hyphen_values = true)]
    pub k_min: i64,
    #[arg(long, default_value_t = 8, allow_hyphen_values = true)]
    pub k_max: i64,
    /// Coefficient table (CSV).
    #[arg(long)]
    pub out: PathBuf,
    /// Full result JSON; defaults to `<out>.json`.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DoseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub panel: PanelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub regression: RegressionArgs,
    #[arg(long, default_value_t = 1)]
    pub reference: u8,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DidMArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub panel: PanelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SdidArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub panel: PanelArgs,
    /// Unit-weight ridge; data-driven when omitted.
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub zeta_time: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AlignArgs {
    #[arg(long)]
    pub excerpt: PathBuf,
    #[arg(long)]
    pub recording: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RepetitionArgs {
    /// Directory of WAV files; the file stem is the unit id.
    #[arg(long = "in", value_name = "DIR")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    /// `lzw` or `rle`.
    #[arg(long, default_value = "lzw")]
    pub codec: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PerplexityArgs {
    /// Directory of WAV files the tokenizer and model are trained on.
    #[arg(long)]
    pub train: PathBuf,
    /// Directory of WAV files to score.
    #[arg(long)]
    pub score: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub vocab: usize,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Model file; defaults to `<out>.model`. The tokenizer is saved next to
    /// it as `<model>.quantizer.json`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DemandArgs {
    #[arg(long)]
    pub prior: f64,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Default, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Any JSON artifact written by this tool.
    #[arg(long)]
    pub config: PathBuf,
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Exact median maximal functions and weight characteristics on step functions.
#[derive(Parser, Debug)]
#[command(name = "medimax", version)]
pub struct Cli {
    /// Run the command stored in a config file instead of one given here.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write the parsed command to a config file before running it.
    #[arg(long, global = true, value_name = "FILE")]
    pub save_config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Write a generated step function or weight.
    Gen(GenArgs),
    /// Apply a maximal operator or the median mollifier to a step function.
    Run(RunArgs),
    /// Compute the weight characteristics of a weight.
    Char(CharArgs),
    /// Run a named verification suite and emit JSON-lines reports.
    Verify(VerifyArgs),
    /// Summarize JSON-lines reports.
    Report(ReportArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct UniverseArgs {
    /// Axis ranges `lo:hi`, comma separated, one per dimension.
    #[arg(long, default_value = "-4:4", allow_hyphen_values = true)]
    pub universe: String,
    /// Cell side length.
    #[arg(long, default_value = "1/8")]
    pub cell: String,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// χ of the box `[from, to)ⁿ`.
    Indicator,
    /// The left node of the first coordinate.
    Ramp,
    /// `j/steps` on the j-th of `steps` slabs along the first axis.
    Step,
    /// Seeded random values `k/q`, or weights `2^j` with `--weight`.
    Random,
    /// `t` on `[−1, 1)ⁿ` and 1 elsewhere.
    #[value(name = "w_t")]
    #[serde(rename = "w_t")]
    Wt,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub generator: Generator,
    #[command(flatten)]
    pub universe: UniverseArgs,
    /// Universe `[−R, R)ⁿ`; overrides `--universe`.
    #[arg(long)]
    pub radius: Option<String>,
    /// Dimension used with `--radius`.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    pub from: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub to: String,
    #[arg(long, default_value_t = 4)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generate a random weight instead of a random function.
    #[arg(long)]
    pub weight: bool,
    /// Weight parameter of `w_t`.
    #[arg(long)]
    pub t: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Op {
    MedianMax,
    TauMax,
    Hl,
    DyadicMedianMax,
    DyadicTauMax,
    DyadicHl,
    /// `x ↦ m_f(Q(x, r))`.
    Mollify,
    /// Shifted-dyadic upper bound for `tau-max`.
    Domination,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyChoice {
    /// Every grid-aligned cube of the universe, up to `--max-side` cells.
    #[default]
    All,
    /// Grid-aligned cubes up to the truncation side, exact for ℝⁿ when the
    /// universe leaves room around the support.
    Truncated,
    /// One dyadic grid shifted by `--grid-shift`.
    Dyadic,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct FamilyArgs {
    #[arg(long, value_enum, default_value_t = FamilyChoice::All)]
    pub family: FamilyChoice,
    /// Largest cube side in cells for `--family all`.
    #[arg(long)]
    pub max_side: Option<usize>,
    /// Dyadic grid shift, `0` or `1/3`, one value or one per axis.
    #[arg(long, default_value = "0")]
    pub grid_shift: String,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct RunArgs {
    /// Step function JSON.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub op: Op,
    #[arg(long)]
    pub tau: Option<String>,
    /// Mollifier radius.
    #[arg(long)]
    pub r: Option<String>,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct CharArgs {
    /// Weight JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Exponent of the A_p characteristic.
    #[arg(long, default_value = "2")]
    pub p: String,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Skip the Fujii–Wilson characteristic above this many cubes.
    #[arg(long, default_value_t = 2048)]
    pub fujii_limit: usize,
    /// Recompute every witness alone and check that it reproduces its value.
    #[arg(long)]
    pub replay: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Suite name, or `all`.
    pub suite: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub count: Option<usize>,
    /// Sharpness parameters, comma separated.
    #[arg(long)]
    pub t: Option<String>,
    /// Dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Cells per axis.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Also write the reports to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ReportArgs {
    /// JSON-lines report files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

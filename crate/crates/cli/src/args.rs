use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "dtlab",
    version,
    about = "Angle bounds and non-spectrality checks for DT-operators"
)]
pub struct Cli {
    /// Directory that receives every output file and the manifest.
    #[arg(long, global = true, default_value = "dtlab-out")]
    pub out: PathBuf,
    /// RNG seed. DTLAB_SEED takes precedence when set.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Exec::Parallel)]
    pub exec: Exec,
    /// Layout of the table printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Sequential,
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Pretty,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Classify a measure against the NZA and UNZA criteria.
    Analyze(AnalyzeArgs),
    /// Evaluate the angle bounds for given parameters.
    Bounds(BoundsArgs),
    /// Run a random-matrix angle experiment.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Reproduce one of the worked examples end to end.
    Example(ExampleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Bounds(_) => "bounds",
            Command::Simulate(Simulate::Lemma1(_)) => "simulate lemma1",
            Command::Simulate(Simulate::Theorem2(_)) => "simulate theorem2",
            Command::Example(_) => "example",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Example1,
    Example2,
    Example3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DChoice {
    MinGap,
    TailRadius,
    Custom,
}

#[derive(Debug, Args, Serialize)]
pub struct MeasureArgs {
    /// Named family measure.
    #[arg(long, value_enum, conflicts_with = "measure")]
    pub family: Option<Family>,
    /// Exponent of the example 1 family.
    #[arg(long)]
    pub p: Option<f64>,
    /// Number of listed atoms for family measures.
    #[arg(long, default_value_t = 1000)]
    pub n_max: usize,
    /// Measure-spec document: a file path, or inline JSON starting with `{`.
    #[arg(long)]
    pub measure: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: MeasureArgs,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = DChoice::MinGap)]
    pub nza_d: DChoice,
    #[arg(long, value_enum, default_value_t = DChoice::TailRadius)]
    pub unza_d: DChoice,
    /// Comma-separated d_n values for a `custom` strategy, starting at n = 1.
    #[arg(long, value_delimiter = ',')]
    pub d_values: Vec<f64>,
    /// First atom index to examine.
    #[arg(long)]
    pub n_from: Option<usize>,
    /// Last atom index to examine.
    #[arg(long)]
    pub n_to: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long, default_value = "1")]
    pub c: String,
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    /// Also evaluate the sharp bound in exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Quantile,
    Iid,
}

#[derive(Debug, Args, Serialize)]
pub struct SimCommon {
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Matrix size.
    #[arg(long = "N", default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = Policy::Quantile)]
    pub policy: Policy,
    /// Means are compared with this multiple of the bound.
    #[arg(long, default_value_t = 0.9)]
    pub mean_factor: f64,
    /// Single trials are compared with the bound minus this.
    #[arg(long, default_value_t = 0.1)]
    pub min_additive: f64,
    /// Measure-spec document: a file path, or inline JSON starting with `{`.
    #[arg(long)]
    pub measure: Option<String>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Simulate {
    /// Atom at 0 plus an annulus: angle against the two-block bound.
    Lemma1(Lemma1Args),
    /// Atom at an accumulation point: angles along shrinking annuli.
    Theorem2(Theorem2Args),
}

#[derive(Debug, Args, Serialize)]
pub struct Lemma1Args {
    #[command(flatten)]
    pub common: SimCommon,
    /// Mass of the atom at 0. Taken from --measure when that is given.
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    /// Inner radius of the annulus.
    #[arg(long, default_value_t = 0.9)]
    pub s_prime: f64,
    /// Outer radius of the annulus.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Theorem2Args {
    #[command(flatten)]
    pub common: SimCommon,
    /// Comma-separated outer radii s_n.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Vec<f64>,
    /// Dyadic schedule length used when --schedule is absent.
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    /// Atoms listed in the default measure.
    #[arg(long, default_value_t = 1000)]
    pub n_max: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ExampleArgs {
    /// Which example: 1, 2 or 3.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
    pub which: u8,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}

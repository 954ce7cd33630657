use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "relrips",
    version,
    about = "Relative Rips complexes and essential-triviality certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a presentation file
    Parse(Common),
    /// Build a Cayley ball
    Ball(BallArgs),
    /// Build a coned-off ball
    Cone(ConeArgs),
    /// Four-point hyperbolicity constant
    Delta(DeltaArgs),
    /// Empirical bounded coset penetration constant
    Bcp(BcpArgs),
    /// Derive (r, d, s) in the working regime
    Params(ParamsArgs),
    /// Build a relative or plain Rips complex
    Rips(RipsArgs),
    /// Reduced integer homology of a Rips complex
    Homology(HomologyArgs),
    /// Search for a stage killing H_k of a given stage
    Brown(BrownArgs),
    /// Plain and relative filtrations side by side for k < n
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Presentation file (a bundled fixture name also works)
    #[arg(value_name = "FIXTURE", required_unless_present = "fixture_flag")]
    pub fixture_pos: Option<PathBuf>,
    #[arg(long = "fixture", value_name = "PATH", conflicts_with = "fixture_pos")]
    pub fixture_flag: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here (atomically) instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    pub fn fixture(&self) -> &PathBuf {
        self.fixture_flag
            .as_ref()
            .or(self.fixture_pos.as_ref())
            .expect("clap enforces a fixture")
    }
}

#[derive(Args, Debug)]
pub struct BallArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "R", default_value_t = 3)]
    pub radius: usize,
    /// Also write the edge list here
    #[arg(long)]
    pub export: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "R", default_value_t = 3)]
    pub radius: usize,
    /// Report relative distance and geodesics from this word ...
    #[arg(long)]
    pub from: Option<String>,
    /// ... to this word
    #[arg(long, requires = "from")]
    pub to: Option<String>,
    #[arg(long = "d-max", default_value_t = 4)]
    pub d_max: usize,
}

#[derive(Args, Debug)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub common: Common,
    /// Radius, or a sweep such as `2..5` or `2,4,6`
    #[arg(long = "R", default_value = "3")]
    pub radius: String,
    /// Sample this many random quadruples instead of all
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Only quadruples at depth <= R - margin
    #[arg(long, default_value_t = 0)]
    pub margin: usize,
    /// Measure the Cayley graph instead of the coned-off graph
    #[arg(long)]
    pub cayley: bool,
}

#[derive(Args, Debug)]
pub struct BcpArgs {
    #[command(flatten)]
    pub common: Common,
    /// Radius, or a sweep such as `3..5`
    #[arg(long = "R", default_value = "3")]
    pub radius: String,
    /// Quasi-geodesic constant, integer or fraction such as `7/2`
    #[arg(long = "T", default_value = "3")]
    pub t: String,
    #[arg(long = "d-max", default_value_t = 3)]
    pub d_max: usize,
    #[arg(long, default_value_t = 1)]
    pub margin: usize,
}

#[derive(Args, Debug)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "R", default_value_t = 4)]
    pub radius: usize,
    /// Cap on the path length used for the BCP estimate
    #[arg(long = "d-max", default_value_t = 3)]
    pub d_max: usize,
    #[arg(long, default_value_t = 1)]
    pub margin: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct StageArgs {
    #[arg(long = "R", default_value_t = 4)]
    pub radius: usize,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    /// Top simplex dimension of the flag completion
    #[arg(long = "k-max", default_value_t = 3)]
    pub k_max: usize,
    /// Plain Rips complex of the peripheral subgroup (only --s is used)
    #[arg(long)]
    pub plain: bool,
}

#[derive(Args, Debug)]
pub struct RipsArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub stage: StageArgs,
    /// Also write the complex here
    #[arg(long)]
    pub export: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HomologyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub stage: StageArgs,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct BrownArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "R", default_value_t = 4)]
    pub radius: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long = "k-max", default_value_t = 3)]
    pub k_max: usize,
    #[arg(long)]
    pub plain: bool,
    #[arg(long = "alpha-r", default_value_t = 0)]
    pub alpha_r: usize,
    #[arg(long = "alpha-d", default_value_t = 0)]
    pub alpha_d: usize,
    #[arg(long = "alpha-s", default_value_t = 0)]
    pub alpha_s: usize,
    /// Increments allowed per coordinate when searching for beta
    #[arg(long, default_value_t = 4)]
    pub budget: usize,
    /// Evidence sidecar path (default: next to --out)
    #[arg(long)]
    pub evidence: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "R", default_value_t = 4)]
    pub radius: usize,
    /// Degrees k < n are checked
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Top simplex dimension; defaults to n
    #[arg(long = "k-max")]
    pub k_max: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub budget: usize,
    #[arg(long = "d-max", default_value_t = 3)]
    pub d_max: usize,
    #[arg(long, default_value_t = 1)]
    pub margin: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "alpha-r", requires_all = ["alpha_d", "alpha_s"])]
    pub alpha_r: Option<usize>,
    #[arg(long = "alpha-d", requires_all = ["alpha_r", "alpha_s"])]
    pub alpha_d: Option<usize>,
    #[arg(long = "alpha-s", requires_all = ["alpha_r", "alpha_d"])]
    pub alpha_s: Option<usize>,
    /// Evidence sidecar path (default: next to --out)
    #[arg(long)]
    pub evidence: Option<PathBuf>,
}

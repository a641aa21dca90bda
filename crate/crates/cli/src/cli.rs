use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

const CURVE_HELP: &str = "constant:a | line:a,b | sqrt:a,λ[,λ2] | parabola:a,b | squared-line:β | \
reciprocal:β | daniels:a,b,b1 | power:β,α | inline JSON | JSON file";

#[derive(Debug, Parser)]
#[command(name = "fpt", version, about = "First-passage times of Brownian motion and Bessel processes")]
pub struct Cli {
    /// Seed for Monte Carlo commands.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write outputs and a manifest into this directory.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Zero-table cache directory (overrides FPT_CACHE_DIR).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply S^(β) to a curve and print the resulting curve as JSON.
    Transform(TransformArgs),
    /// Tabulate a catalog crossing density.
    Density(DensityArgs),
    /// Transport a catalog density along S^(β), with the transport receipt.
    Identity(IdentityArgs),
    /// Monte Carlo crossing-time histogram.
    Mc(McArgs),
    /// Boundary and crossing density from an image measure.
    Images(ImagesArgs),
    /// Transience test and large-time approximants.
    Asym(AsymArgs),
    /// Run a named self-check scenario.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long, help = CURVE_HELP)]
    pub curve: String,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// brownian | bessel:δ | JSON
    #[arg(long, default_value = "brownian")]
    pub spec: String,
    /// Start point.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, help = CURVE_HELP)]
    pub curve: String,
    /// lo:hi:n or t1,t2,...
    #[arg(long)]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long, default_value = "brownian")]
    pub spec: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Base curve whose catalog density is transported.
    #[arg(long, help = CURVE_HELP)]
    pub curve: String,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long)]
    pub grid: String,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, default_value = "brownian")]
    pub spec: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, help = CURVE_HELP)]
    pub curve: String,
    /// Number of paths, e.g. 1e6.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Parallel chunks (does not change results).
    #[arg(long)]
    pub streams: Option<usize>,
    /// Disable the Brownian-bridge crossing correction.
    #[arg(long)]
    pub no_bridge: bool,
    /// MC configuration as JSON; flags override its fields.
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Debug, Args)]
pub struct ImagesArgs {
    /// atom:s,w | atoms:s1,w1;s2,w2 | daniels:a,b,b1 | inline JSON | JSON file
    #[arg(long)]
    pub measure: String,
    /// Transform the measure by S^(β) first (β > 0).
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AsymArgs {
    #[arg(long, help = CURVE_HELP)]
    pub curve: String,
    /// Approximant for the S^(β) image of the curve.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub grid: Option<String>,
    /// Crossing probability of the curve (needed for β < 0).
    #[arg(long)]
    pub r: Option<f64>,
    /// Sample monotonicity and concavity on t_lo,t_hi and report warnings.
    #[arg(long)]
    pub spot_check: Option<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Scenario name (see --list).
    #[arg(required_unless_present = "list")]
    pub scenario: Option<String>,
    #[arg(long)]
    pub list: bool,
    /// Paths for Monte Carlo scenarios.
    #[arg(long)]
    pub n: Option<String>,
}

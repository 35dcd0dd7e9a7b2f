use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "lyapunov",
    version,
    about = "Lyapunov exponent of the random-potential Schrödinger equation"
)]
pub struct Cli {
    /// Flat key = value file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lyapunov exponent at one parameter point.
    Gamma(GammaArgs),
    /// Table of γ/ω over a log-spaced ν grid.
    Sweep(SweepArgs),
    /// Check the four regime accuracy claims.
    Validate(ValidateArgs),
    /// The universal small-ν constant c.
    ConstantC(ConstantArgs),
    /// Monte Carlo estimate from the phase process.
    Mc(McArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Pos,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GammaMethod {
    Exact,
    Asympt,
    Mc,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMethodArg {
    Exact,
    Asympt,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TextFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct GammaArgs {
    /// Energy λ.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Frequency ω = √|λ|; needs --sign.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, value_enum)]
    pub sign: Option<SignArg>,
    /// Noise strength σ.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// ν = 2ω³/σ², in place of --sigma.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, value_enum, default_value_t = GammaMethod::Uniform)]
    pub method: GammaMethod,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Seed for --method mc.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Chains for --method mc.
    #[arg(long, default_value_t = 64)]
    pub chains: usize,
    /// Chain length in x for --method mc (default 10⁴/γ).
    #[arg(long)]
    pub length: Option<f64>,
    /// Base step in units of 1/ω for --method mc.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub sign: SignArg,
    #[arg(long)]
    pub nu_min: f64,
    #[arg(long)]
    pub nu_max: f64,
    #[arg(long, default_value_t = 8)]
    pub points: usize,
    /// Comma-separated subset of exact, asympt, mc.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "exact,asympt"
    )]
    pub methods: Vec<SweepMethodArg>,
    /// Table destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 64)]
    pub chains: usize,
    /// Monte Carlo chain length in decay lengths 1/γ.
    #[arg(long, default_value_t = 1e4)]
    pub decay_lengths: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Multiplier applied to every threshold.
    #[arg(long, default_value_t = 1.0)]
    pub tol_scale: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ConstantArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    pub format: TextFormat,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct McArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 64)]
    pub chains: usize,
    /// Chain length in x (default 10⁴/γ).
    #[arg(long)]
    pub length: Option<f64>,
    /// Base step in units of 1/ω.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Dyadic refinements of the base step.
    #[arg(long, default_value_t = 0)]
    pub step_halvings: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial value of z = cot θ.
    #[arg(long, default_value_t = 0.0)]
    pub z0: f64,
    #[arg(long, default_value_t = 1e6)]
    pub z_reset: f64,
    /// Discarded initial extent (default 5% of the length).
    #[arg(long)]
    pub burn_in: Option<f64>,
}

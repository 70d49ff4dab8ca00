use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "nlhopf", version, about = "Double Hopf analysis and simulation for nonlocal reaction-diffusion models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stability curves and critical values.
    Analyze(Common),
    /// Normal form coefficients, polar reduction and unfolding case.
    Normalform(Common),
    /// Amplitude-system prediction at a parameter point.
    Classify(Common),
    /// Direct simulation with attractor classification.
    Simulate(Common),
    /// Poincaré section of a simulated run.
    Poincare(Common),
    /// Region map of the amplitude system over a parameter box.
    Sweep(Common),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Analyze(c)
            | Command::Normalform(c)
            | Command::Classify(c)
            | Command::Simulate(c)
            | Command::Poincare(c)
            | Command::Sweep(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Path to a JSON model file, or the name of a built-in model.
    #[arg(long, default_value = "holling_tanner")]
    pub model: String,

    /// Override a model parameter, e.g. --set beta=0.2 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Parameter offset from the double Hopf point.
    #[arg(long, num_args = 2, value_names = ["MU1", "MU2"], allow_negative_numbers = true)]
    pub mu: Option<Vec<f64>>,

    /// Named experiment: d1, d2, d4, d6, or a comma-separated list, or all.
    #[arg(long)]
    pub preset: Option<String>,

    /// Initial condition: equilibrium, or u0,us,uc;v0,vs,vc.
    #[arg(long)]
    pub ic: Option<String>,

    /// Critical spatial mode n₂.
    #[arg(long, default_value_t = 1)]
    pub mode: u32,

    /// Number of grid panels.
    #[arg(long, default_value_t = 128)]
    pub grid: usize,

    /// Time step, or auto.
    #[arg(long, default_value = "auto")]
    pub dt: String,

    #[arg(long = "t-end", default_value_t = 5000.0)]
    pub t_end: f64,

    /// Section level on v(π, t); defaults to the post-transient mean.
    #[arg(long, allow_negative_numbers = true)]
    pub level: Option<f64>,

    /// μ₁ range of a sweep.
    #[arg(long = "mu1-range", num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub mu1_range: Option<Vec<f64>>,

    /// μ₂ range of a sweep.
    #[arg(long = "mu2-range", num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub mu2_range: Option<Vec<f64>>,

    /// Sweep samples along μ₁ and μ₂.
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    pub samples: Option<Vec<usize>>,

    #[arg(long, default_value = ".")]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,

    /// Include F vectors, h vectors and partial sums in the normal form report.
    #[arg(long = "dump-intermediates")]
    pub dump_intermediates: bool,
}

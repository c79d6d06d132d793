use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use torsion_core::harness::{Family, Normalization, ReportFormat};
use torsion_core::thresholds::Constraint;
use torsion_core::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(
    name = "torsion",
    version,
    about = "Robin torsion toolkit: closed forms, threshold certification, FEM verification"
)]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form ball and shell quantities.
    Radial(RadialArgs),
    /// Threshold certification and lemma-function structure suite.
    Thresholds(ThresholdArgs),
    /// Parallel-coordinates lower bound, for one polygon or a seeded family.
    Lowerbound(LowerboundArgs),
    /// Single FEM solve with a refinement budget.
    Fem(FemArgs),
    /// Theorem and lemma sweeps over a seeded family.
    Verify(VerifyArgs),
    /// Convert a JSON report to CSV or re-emit it.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    Perimeter,
    #[value(alias = "area")]
    Volume,
}

impl From<ConstraintArg> for Constraint {
    fn from(c: ConstraintArg) -> Self {
        match c {
            ConstraintArg::Perimeter => Constraint::Perimeter,
            ConstraintArg::Volume => Constraint::Volume,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Both,
    Theorem,
    Lemma,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the result here instead of only printing a summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; defaults to the extension of --out, then json.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

impl Output {
    pub fn format(&self) -> ReportFormat {
        match (self.format, &self.out) {
            (Some(f), _) => f.into(),
            (None, Some(p)) => ReportFormat::from_path(p).unwrap_or(ReportFormat::Json),
            (None, None) => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Args)]
pub struct RadialArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: u32,
    /// Ball radius, or outer shell radius with --inner.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Robin parameter for the ball torsion.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Inner radius of a Dirichlet–Neumann shell.
    #[arg(long)]
    pub inner: Option<f64>,
    /// Number of ball Steklov eigenvalues to list.
    #[arg(long, default_value_t = 3)]
    pub steklov: i64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Dimensions for the general-d kinds (repeat or comma-separate).
    #[arg(long = "dim", value_delimiter = ',', default_values_t = 3..=12)]
    pub dims: Vec<u32>,
    /// Certification grid nodes on (0, 1).
    #[arg(long, default_value_t = torsion_core::thresholds::CERTIFY_NODES)]
    pub grid: usize,
    /// csv writes the sampled curves, json the full suite.
    #[command(flatten)]
    pub output: Output,
}

/// Science parameters shared by the family-based commands. Flags override
/// the config file field by field.
#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment config in JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<Family>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Held-fixed quantity; the value defaults to 2π for perimeter and π for volume.
    #[arg(long, value_enum)]
    pub constraint: Option<ConstraintArg>,
    /// Value of the held-fixed quantity.
    #[arg(long, allow_hyphen_values = true)]
    pub value: Option<f64>,
    #[arg(long)]
    pub mesh_h: Option<f64>,
    /// Refinement levels h, h/2, ….
    #[arg(long)]
    pub levels: Option<usize>,
    /// Tolerance policy entries: window_delta=…, budget_floor=…, sandwich_tol=….
    #[arg(long = "tolerance", value_name = "KEY=VALUE")]
    pub tolerance: Vec<String>,
    /// Only planar domains are supported.
    #[arg(long, default_value_t = 2)]
    pub dim: u32,
}

impl ExperimentArgs {
    pub fn config(&self, base: ExperimentConfig) -> Result<ExperimentConfig> {
        if self.dim != 2 {
            bail!(torsion_core::Error::Config(format!(
                "the FEM oracle is planar; --dim {} is not supported here",
                self.dim
            )));
        }
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => base,
        };
        if let Some(f) = self.family {
            c.family = f;
        }
        if let Some(n) = self.count {
            c.count = n;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(h) = self.mesh_h {
            c.mesh_h = h;
        }
        if let Some(l) = self.levels {
            c.levels = l;
        }
        c.normalization = match (self.constraint, self.value) {
            (None, None) => c.normalization,
            (Some(ConstraintArg::Perimeter), v) => Normalization::Perimeter(v.unwrap_or(2.0 * PI)),
            (Some(ConstraintArg::Volume), v) => Normalization::Area(v.unwrap_or(PI)),
            (None, Some(v)) => match c.normalization {
                Normalization::Perimeter(_) => Normalization::Perimeter(v),
                Normalization::Area(_) => Normalization::Area(v),
            },
        };
        for entry in &self.tolerance {
            let (key, value) = entry
                .split_once('=')
                .with_context(|| config_error(format!("tolerance '{entry}' is not KEY=VALUE")))?;
            let v: f64 = value
                .trim()
                .parse()
                .with_context(|| config_error(format!("tolerance value '{value}' is not a number")))?;
            let t = &mut c.tolerance;
            match key.trim() {
                "window_delta" => t.window_delta = v,
                "budget_floor" => t.budget_floor = v,
                "sandwich_tol" => t.sandwich_tol = v,
                other => bail!(torsion_core::Error::Config(format!("unknown tolerance key '{other}'"))),
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn config_error(m: String) -> torsion_core::Error {
    torsion_core::Error::Config(m)
}

#[derive(Debug, Args)]
pub struct LowerboundArgs {
    /// Single polygon file; without it the seeded family is run.
    #[arg(long, conflicts_with_all = ["config", "family", "count", "seed"])]
    pub polygon: Option<PathBuf>,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct FemArgs {
    /// Polygon file.
    #[arg(long, conflicts_with_all = ["regular", "square"])]
    pub polygon: Option<PathBuf>,
    /// Regular n-gon of circumradius 1.
    #[arg(long, conflicts_with = "square")]
    pub regular: Option<usize>,
    /// Unit square.
    #[arg(long)]
    pub square: bool,
    /// Robin parameter; Dirichlet when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub mesh_h: f64,
    /// 1 for a single solve, at least 3 for an extrapolated budget.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Write the finest mesh in the plain-text dump format.
    #[arg(long)]
    pub mesh_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// α as fractions of −σ₁(Ω) (comma-separated).
    #[arg(long = "alpha", value_delimiter = ',', allow_hyphen_values = true)]
    pub fractions: Vec<f64>,
    /// Which verdict sets the status and exit code.
    #[arg(long, value_enum, default_value_t = Check::Both)]
    pub check: Check,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON report written by `verify`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

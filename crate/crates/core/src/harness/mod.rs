//! Experiment orchestration: seeded domain families, theorem and lemma
//! sweeps over the FEM oracle, certification suites and flat reports.

mod domains;
mod report;
mod suites;
mod sweep;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use domains::{generate_domains, Domain, STRETCH_ASPECTS};
pub use report::{
    emit_report, read_csv_rows, read_json_report, CsvRow, JsonReport, ReportFormat, RunMetadata, CSV_HEADER,
};
pub use suites::{
    derivative_identity_check, gap_scan, run_parallel_coordinates_suite, run_threshold_suite, threshold_cross_check,
    CrossCheck, DerivativeCheck, GapSummary, ParallelRecord, ParallelSuite, ThresholdSuite, CROSS_CHECK_TOL,
    DERIVATIVE_TOL, GAP_NODES,
};
pub use sweep::{sample_at, sweep, sweep_domains, verify_lemma_core, verify_theorem_2d, Skipped, SweepReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RegularNgon,
    RandomConvex,
    StretchedHexagon,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::RegularNgon => "regular-ngon",
            Family::RandomConvex => "random-convex",
            Family::StretchedHexagon => "stretched-hexagon",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Family::RegularNgon, Family::RandomConvex, Family::StretchedHexagon]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown family '{s}'")))
    }
}

/// Which quantity is held fixed, and at what value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Perimeter(f64),
    Area(f64),
}

impl Normalization {
    pub fn value(self) -> f64 {
        match self {
            Normalization::Perimeter(c) | Normalization::Area(c) => c,
        }
    }

    /// Radius of the comparison disk.
    pub fn ball_radius(self) -> f64 {
        match self {
            Normalization::Perimeter(c) => c / (2.0 * std::f64::consts::PI),
            Normalization::Area(c) => (c / std::f64::consts::PI).sqrt(),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalization::Perimeter(c) => write!(f, "perimeter={c}"),
            Normalization::Area(c) => write!(f, "area={c}"),
        }
    }
}

/// `perimeter=6.28` or `area=3.14`.
impl FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("normalization '{s}' is not of the form kind=value")))?;
        let c: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("normalization value '{value}' is not a number")))?;
        match kind.trim() {
            "perimeter" => Ok(Normalization::Perimeter(c)),
            "area" | "volume" => Ok(Normalization::Area(c)),
            other => Err(Error::Config(format!("unknown normalization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancePolicy {
    /// α is kept inside `(−σ₁(1−δ), 0)`.
    pub window_delta: f64,
    /// Lower bound on every budget, relative to the magnitude of the compared values.
    pub budget_floor: f64,
    /// Slack on the lower side of the parallel-coordinates sandwich.
    pub sandwich_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            window_delta: 0.05,
            budget_floor: 1e-9,
            sandwich_tol: 1e-8,
        }
    }
}

pub const DEFAULT_ALPHA_FRACTIONS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    pub count: usize,
    pub seed: u64,
    pub normalization: Normalization,
    /// Multiples of `−σ₁(Ω)`.
    #[serde(default = "default_fractions")]
    pub alpha_fractions: Vec<f64>,
    #[serde(default = "default_mesh_h")]
    pub mesh_h: f64,
    /// Mesh sizes `h, h/2, …`.
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub tolerance: TolerancePolicy,
}

fn default_fractions() -> Vec<f64> {
    DEFAULT_ALPHA_FRACTIONS.to_vec()
}

fn default_mesh_h() -> f64 {
    0.2
}

fn default_levels() -> usize {
    3
}

impl ExperimentConfig {
    pub fn new(family: Family, count: usize, seed: u64, normalization: Normalization) -> Self {
        ExperimentConfig {
            family,
            count,
            seed,
            normalization,
            alpha_fractions: default_fractions(),
            mesh_h: default_mesh_h(),
            levels: default_levels(),
            tolerance: TolerancePolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.count == 0 {
            return bad("count must be positive".into());
        }
        let c = self.normalization.value();
        if !(c > 0.0 && c.is_finite()) {
            return bad(format!("normalization value must be positive, got {c}"));
        }
        if self.alpha_fractions.is_empty() || self.alpha_fractions.iter().any(|f| !f.is_finite()) {
            return bad("alpha_fractions must be a nonempty list of finite numbers".into());
        }
        if !(self.mesh_h > 0.0 && self.mesh_h.is_finite()) {
            return bad(format!("mesh_h must be positive, got {}", self.mesh_h));
        }
        if self.levels < 3 {
            return bad(format!("at least 3 refinement levels are needed, got {}", self.levels));
        }
        let t = &self.tolerance;
        if !(t.window_delta > 0.0 && t.window_delta < 1.0) {
            return bad(format!("window_delta must lie in (0, 1), got {}", t.window_delta));
        }
        if !(t.budget_floor >= 0.0 && t.budget_floor.is_finite()) {
            return bad(format!("budget_floor must be nonnegative, got {}", t.budget_floor));
        }
        if !(t.sandwich_tol >= 0.0 && t.sandwich_tol.is_finite()) {
            return bad(format!("sandwich_tol must be nonnegative, got {}", t.sandwich_tol));
        }
        Ok(())
    }

    pub fn mesh_sizes(&self) -> Vec<f64> {
        (0..self.levels).map(|k| self.mesh_h / (1u64 << k) as f64).collect()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

impl Status {
    /// Fails only below `−budget`, passes only above `budget`.
    pub fn classify(margin: f64, budget: f64) -> Status {
        if margin.is_nan() {
            Status::Indeterminate
        } else if margin > budget {
            Status::Pass
        } else if margin < -budget {
            Status::Fail
        } else {
            Status::Indeterminate
        }
    }

    /// Worst of two: fail over indeterminate over pass.
    pub fn combine(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            _ => Pass,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Status {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pass" => Ok(Status::Pass),
            "fail" => Ok(Status::Fail),
            "indeterminate" => Ok(Status::Indeterminate),
            other => Err(Error::InvalidInput(format!("unknown status '{other}'"))),
        }
    }
}

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

pub fn exit_code<I: IntoIterator<Item = Status>>(statuses: I) -> i32 {
    let mut code = EXIT_PASS;
    for s in statuses {
        match s {
            Status::Fail => return EXIT_FAIL,
            Status::Indeterminate => code = EXIT_INDETERMINATE,
            Status::Pass => {}
        }
    }
    code
}

/// One (domain, α) sample of the theorem and lemma sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub domain_id: String,
    pub family: Family,
    pub n_vertices: usize,
    pub area: f64,
    pub perimeter: f64,
    pub inradius: f64,
    pub sigma1: f64,
    pub sigma1_budget: f64,
    pub alpha_fraction: f64,
    pub alpha: f64,
    pub tau_alpha: f64,
    pub tau_alpha_budget: f64,
    pub tau_ball: f64,
    pub tau_dirichlet: f64,
    pub tau_dirichlet_budget: f64,
    pub lemma_margin: f64,
    pub lemma_budget: f64,
    pub lemma_status: Status,
    pub theorem_margin: f64,
    pub theorem_budget: f64,
    pub theorem_status: Status,
    /// A refinement sequence behind this record was non-monotone.
    pub flagged: bool,
    pub status: Status,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_state_logic() {
        assert_eq!(Status::classify(1.0, 0.5), Status::Pass);
        assert_eq!(Status::classify(-1.0, 0.5), Status::Fail);
        assert_eq!(Status::classify(0.5, 0.5), Status::Indeterminate);
        assert_eq!(Status::classify(-0.5, 0.5), Status::Indeterminate);
        assert_eq!(Status::classify(0.0, 0.0), Status::Indeterminate);
        assert_eq!(Status::classify(f64::NAN, 1.0), Status::Indeterminate);
    }

    #[test]
    fn exit_codes() {
        use Status::*;
        assert_eq!(exit_code([Pass, Pass]), 0);
        assert_eq!(exit_code([Pass, Indeterminate]), 2);
        assert_eq!(exit_code([Indeterminate, Fail, Pass]), 1);
        assert_eq!(exit_code([]), 0);
        assert_eq!(Pass.combine(Indeterminate), Indeterminate);
        assert_eq!(Indeterminate.combine(Fail), Fail);
    }

    #[test]
    fn config_json() {
        let c = ExperimentConfig::from_json_str(
            r#"{"family":"random-convex","count":4,"seed":7,"normalization":{"area":3.0}}"#,
        )
        .unwrap();
        assert_eq!(c.alpha_fractions, DEFAULT_ALPHA_FRACTIONS.to_vec());
        assert_eq!(c.normalization, Normalization::Area(3.0));
        assert_eq!(c.mesh_sizes(), vec![0.2, 0.1, 0.05]);
        let back = ExperimentConfig::from_json_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn config_errors() {
        let base = ExperimentConfig::new(Family::RegularNgon, 3, 1, Normalization::Perimeter(1.0));
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.count = 0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = base.clone();
        c.levels = 2;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.tolerance.window_delta = 0.0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.normalization = Normalization::Area(-1.0);
        assert!(c.validate().is_err());
        assert!(
            ExperimentConfig::from_json_str(r#"{"family":"blob","count":1,"seed":0,"normalization":{"area":1}}"#)
                .is_err()
        );
        assert!(ExperimentConfig::from_json_str(
            r#"{"family":"regular-ngon","count":1,"seed":0,"normalization":{"area":1},"typo":1}"#
        )
        .is_err());
    }

    #[test]
    fn normalization_parsing() {
        assert_eq!(
            "perimeter=2".parse::<Normalization>().unwrap(),
            Normalization::Perimeter(2.0)
        );
        assert_eq!("area = 3.5".parse::<Normalization>().unwrap(), Normalization::Area(3.5));
        assert!("width=1".parse::<Normalization>().is_err());
        assert!("perimeter".parse::<Normalization>().is_err());
        let r = Normalization::Area(std::f64::consts::PI).ball_radius();
        assert!((r - 1.0).abs() < 1e-15);
    }
}

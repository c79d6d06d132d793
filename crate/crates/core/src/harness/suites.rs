use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::Skipped;
use super::{generate_domains, Domain, ExperimentConfig, Family, Status};
use crate::dd::DD;
use crate::error::{Error, Result};
use crate::fem::{refinement_systems, solve_dirichlet_torsion, Extrapolation};
use crate::parallel::dirichlet_lower_bound;
use crate::radial::ShellGeometry;
use crate::thresholds::{
    certified_minimum_on, lemma_derivative, lemma_function_dd, quantitative_gap, sign_pattern, threshold,
    CertifiedMinimum, Constraint, LemmaFunction, LemmaFunctionReport, ThresholdKind,
};

/// Agreement of the general-d formula with the dedicated d = 3 one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub general: ThresholdKind,
    pub special: ThresholdKind,
    pub nodes: usize,
    pub max_rel_diff: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Central differences against the factored derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub d: u32,
    pub function: LemmaFunction,
    pub nodes: usize,
    pub max_rel_error: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Worst case of the ball-versus-shell gap over a ratio grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub d: u32,
    pub constraint: Constraint,
    pub nodes: usize,
    pub min_margin: f64,
    pub min_lhs: f64,
    pub min_rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSuite {
    pub certifications: Vec<CertifiedMinimum>,
    pub cross_checks: Vec<CrossCheck>,
    pub sign_patterns: Vec<LemmaFunctionReport>,
    pub derivative_checks: Vec<DerivativeCheck>,
    pub gaps: Vec<GapSummary>,
}

impl ThresholdSuite {
    /// One labelled pass/fail line per check.
    pub fn lines(&self) -> Vec<(String, bool)> {
        let mut out = Vec::new();
        for c in &self.certifications {
            out.push((
                format!(
                    "certify {} d={}: min {:.12} at t={:.4}, bound {}",
                    c.kind, c.d, c.min_value, c.argmin, c.bound
                ),
                c.pass,
            ));
        }
        for c in &self.cross_checks {
            out.push((
                format!(
                    "cross-check {} vs {}: max rel diff {:.3e}",
                    c.general, c.special, c.max_rel_diff
                ),
                c.pass,
            ));
        }
        for s in &self.sign_patterns {
            out.push((
                format!(
                    "structure {} d={}: {} roots, {} critical points ({})",
                    s.function,
                    s.d,
                    s.roots.len(),
                    s.critical_points.len(),
                    s.expected
                ),
                s.structure_ok,
            ));
        }
        for c in &self.derivative_checks {
            out.push((
                format!(
                    "derivative {}' d={}: max rel error {:.3e}",
                    c.function, c.d, c.max_rel_error
                ),
                c.pass,
            ));
        }
        for g in &self.gaps {
            out.push((
                format!("gap {} d={}: min margin {:.3e}", g.constraint, g.d, g.min_margin),
                g.pass,
            ));
        }
        out
    }

    pub fn pass(&self) -> bool {
        self.lines().iter().all(|(_, ok)| *ok)
    }

    pub fn statuses(&self) -> Vec<Status> {
        self.lines()
            .into_iter()
            .map(|(_, ok)| if ok { Status::Pass } else { Status::Fail })
            .collect()
    }
}

pub const CROSS_CHECK_TOL: f64 = 1e-12;
pub const DERIVATIVE_TOL: f64 = 1e-6;
pub const GAP_NODES: usize = 99;

/// Certifications for the fixed planar and three-dimensional kinds plus both
/// general kinds at every `d` in `dims`, with structure, derivative and gap
/// checks alongside.
pub fn run_threshold_suite(dims: &[u32], grid: usize) -> Result<ThresholdSuite> {
    if grid < 2 {
        return Err(Error::Config(format!("grid needs at least 2 nodes, got {grid}")));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < 3) {
        return Err(Error::Config(format!("general dimensions start at 3, got {d}")));
    }
    let mut jobs: Vec<(ThresholdKind, u32)> = vec![
        (ThresholdKind::PlanarPerimeter, 2),
        (ThresholdKind::ThreeDPerimeter, 3),
        (ThresholdKind::ThreeDVolume, 3),
    ];
    for &d in dims {
        jobs.push((ThresholdKind::GeneralPerimeter, d));
        jobs.push((ThresholdKind::GeneralVolume, d));
    }
    let certifications = jobs
        .par_iter()
        .map(|&(k, d)| certified_minimum_on(k, d, grid))
        .collect::<Result<Vec<_>>>()?;

    let mut cross_checks = Vec::new();
    if dims.contains(&3) {
        for (general, special) in [
            (ThresholdKind::GeneralPerimeter, ThresholdKind::ThreeDPerimeter),
            (ThresholdKind::GeneralVolume, ThresholdKind::ThreeDVolume),
        ] {
            cross_checks.push(threshold_cross_check(general, special, grid)?);
        }
    }

    let pattern_jobs: Vec<(LemmaFunction, u32)> = dims
        .iter()
        .flat_map(|&d| LemmaFunction::ALL.into_iter().map(move |f| (f, d)))
        .collect();
    let sign_patterns = pattern_jobs
        .par_iter()
        .map(|&(f, d)| sign_pattern(f, d))
        .collect::<Result<Vec<_>>>()?;

    let mut derivative_checks = Vec::new();
    let mut gaps = Vec::new();
    for &d in dims {
        for f in [LemmaFunction::G, LemmaFunction::K] {
            derivative_checks.push(derivative_identity_check(f, d)?);
        }
        for c in [Constraint::Perimeter, Constraint::Volume] {
            gaps.push(gap_scan(d, c)?);
        }
    }
    Ok(ThresholdSuite {
        certifications,
        cross_checks,
        sign_patterns,
        derivative_checks,
        gaps,
    })
}

pub fn threshold_cross_check(general: ThresholdKind, special: ThresholdKind, grid: usize) -> Result<CrossCheck> {
    let mut worst = 0.0_f64;
    for t in crate::thresholds::certification_grid(grid) {
        let a = threshold(general, 3, t)?.value;
        let b = threshold(special, 3, t)?.value;
        worst = worst.max((a - b).abs() / b.abs());
    }
    Ok(CrossCheck {
        general,
        special,
        nodes: grid,
        max_rel_diff: worst,
        tol: CROSS_CHECK_TOL,
        pass: worst <= CROSS_CHECK_TOL,
    })
}

/// Checks `g' = (d+2)t^{d−1}h` or `k' = (d+2)t^{d−1}m` by central
/// differences of the double-double values on `[0.05, 0.95]`.
pub fn derivative_identity_check(function: LemmaFunction, d: u32) -> Result<DerivativeCheck> {
    let step = 1.0 / (1u64 << 20) as f64;
    let nodes = 91;
    let mut worst = 0.0_f64;
    for i in 0..nodes {
        let t = 0.05 + 0.9 * i as f64 / (nodes - 1) as f64;
        let (a, b) = (t - step, t + step);
        let diff: DD = lemma_function_dd(function, d, b)? - lemma_function_dd(function, d, a)?;
        let fd = (diff / (b - a)).to_f64();
        let exact = lemma_derivative(function, d, t)?;
        worst = worst.max((fd - exact).abs() / exact.abs().max(1e-12));
    }
    Ok(DerivativeCheck {
        d,
        function,
        nodes,
        max_rel_error: worst,
        tol: DERIVATIVE_TOL,
        pass: worst <= DERIVATIVE_TOL,
    })
}

/// Gap margins at `t = i/100`, `i = 1..=99`.
pub fn gap_scan(d: u32, constraint: Constraint) -> Result<GapSummary> {
    let mut s = GapSummary {
        d,
        constraint,
        nodes: GAP_NODES,
        min_margin: f64::INFINITY,
        min_lhs: f64::INFINITY,
        min_rhs: f64::INFINITY,
        pass: true,
    };
    for i in 1..=GAP_NODES {
        let t = i as f64 / (GAP_NODES + 1) as f64;
        let g = quantitative_gap(d, &ShellGeometry::new(d, t, 1.0)?, constraint)?;
        s.min_margin = s.min_margin.min(g.margin);
        s.min_lhs = s.min_lhs.min(g.lhs);
        s.min_rhs = s.min_rhs.min(g.rhs);
        s.pass &= g.margin >= 0.0 && g.lhs > 0.0 && g.rhs > 0.0;
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelRecord {
    pub domain_id: String,
    pub family: Family,
    pub n_vertices: usize,
    pub area: f64,
    pub perimeter: f64,
    pub inradius: f64,
    pub r1: f64,
    pub r2: f64,
    pub tau_dn: f64,
    pub lower_bound: f64,
    pub tau_dirichlet: f64,
    pub tau_dirichlet_budget: f64,
    /// `LB − τ_DN`, required to be at least `−tol`.
    pub lower_margin: f64,
    /// `τ_D − LB`, judged against the FEM budget.
    pub upper_margin: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelSuite {
    pub records: Vec<ParallelRecord>,
    pub skipped: Vec<Skipped>,
}

impl ParallelSuite {
    pub fn statuses(&self) -> impl Iterator<Item = Status> + '_ {
        self.records.iter().map(|r| r.status)
    }
}

/// `τ_DN(matched shell) − tol ≤ LB ≤ τ_D,h + budget` for every domain.
pub fn run_parallel_coordinates_suite(config: &ExperimentConfig) -> Result<ParallelSuite> {
    let domains = generate_domains(config)?;
    let hs = config.mesh_sizes();
    let results: Vec<std::result::Result<ParallelRecord, Skipped>> = domains
        .par_iter()
        .map(|d| {
            sandwich(d, config, &hs).map_err(|e| Skipped {
                domain_id: d.id.clone(),
                alpha_fraction: None,
                alpha: None,
                reason: e.to_string(),
            })
        })
        .collect();
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(s) => {
                log::warn!("{}: {}", s.domain_id, s.reason);
                skipped.push(s);
            }
        }
    }
    records.sort_by(|a, b| a.domain_id.cmp(&b.domain_id));
    Ok(ParallelSuite { records, skipped })
}

fn sandwich(domain: &Domain, config: &ExperimentConfig, hs: &[f64]) -> Result<ParallelRecord> {
    let lb = dirichlet_lower_bound(&domain.polygon)?;
    let tau = refinement_systems(&domain.polygon, hs)?
        .iter()
        .map(|s| solve_dirichlet_torsion(s).map(|r| r.tau))
        .collect::<Result<Vec<_>>>()?;
    let tau_d = Extrapolation::new(hs, &tau)?;
    let tol = config.tolerance.sandwich_tol;
    let budget = tau_d
        .budget
        .max(config.tolerance.budget_floor * tau_d.extrapolated.abs());
    let lower_margin = lb.bound - lb.tau_dn;
    let upper_margin = tau_d.extrapolated - lb.bound;
    let status = if lower_margin < -tol {
        Status::Fail
    } else {
        Status::classify(upper_margin, budget)
    };
    Ok(ParallelRecord {
        domain_id: domain.id.clone(),
        family: domain.family,
        n_vertices: domain.polygon.len(),
        area: lb.summary.area,
        perimeter: lb.summary.perimeter,
        inradius: lb.summary.inradius,
        r1: lb.shell.shell.inner,
        r2: lb.shell.shell.outer,
        tau_dn: lb.tau_dn,
        lower_bound: lb.bound,
        tau_dirichlet: tau_d.extrapolated,
        tau_dirichlet_budget: budget,
        lower_margin,
        upper_margin,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Normalization;

    #[test]
    fn small_threshold_suite() {
        let s = run_threshold_suite(&[3, 5], 400).unwrap();
        assert_eq!(s.certifications.len(), 3 + 2 * 2);
        assert_eq!(s.cross_checks.len(), 2);
        assert_eq!(s.sign_patterns.len(), 2 * LemmaFunction::ALL.len());
        assert!(
            s.pass(),
            "{:#?}",
            s.lines().into_iter().filter(|l| !l.1).collect::<Vec<_>>()
        );
        assert!(s.statuses().iter().all(|x| *x == Status::Pass));
    }

    #[test]
    fn suite_rejects_planar_dims() {
        assert!(matches!(run_threshold_suite(&[2], 100), Err(Error::Config(_))));
        assert!(run_threshold_suite(&[3], 1).is_err());
    }

    #[test]
    fn square_sandwich() {
        let c = ExperimentConfig::new(Family::RegularNgon, 62, 0, Normalization::Area(1.0));
        let d = &generate_domains(&c).unwrap()[1];
        let mut c = c.clone();
        c.mesh_h = 0.1;
        let r = sandwich(d, &c, &c.mesh_sizes()).unwrap();
        assert!((r.tau_dn - 0.027188422159244298).abs() < 1e-9);
        assert!(r.lower_bound >= r.tau_dn && r.lower_bound <= r.tau_dirichlet);
        assert!((r.tau_dirichlet - 0.035144253738788454).abs() <= r.tau_dirichlet_budget);
        assert_eq!(r.status, Status::Pass);
    }
}

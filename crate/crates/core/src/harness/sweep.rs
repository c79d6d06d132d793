use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_domains, Domain, ExperimentConfig, Status, VerificationRecord};
use crate::error::{Error, Result};
use crate::fem::{
    refinement_systems, solve_dirichlet_torsion, solve_robin_torsion_with, steklov_spectrum, Extrapolation, FemSystem,
    RobinOptions, SteklovResult,
};
use crate::geometry::summarize;
use crate::radial::{robin_torsion_ball, BallGeometry};

/// A requested sample that produced no record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub domain_id: String,
    pub alpha_fraction: Option<f64>,
    pub alpha: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// Sorted by domain id, then α.
    pub records: Vec<VerificationRecord>,
    pub skipped: Vec<Skipped>,
}

impl SweepReport {
    pub fn statuses(&self) -> impl Iterator<Item = Status> + '_ {
        self.records.iter().map(|r| r.status)
    }
}

/// Theorem and lemma margins for every (domain, α) sample.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    sweep_domains(&generate_domains(config)?, config)
}

/// [`sweep`] over caller-supplied domains; the family fields of `config`
/// are ignored.
pub fn sweep_domains(domains: &[Domain], config: &ExperimentConfig) -> Result<SweepReport> {
    config.validate()?;
    let hs = config.mesh_sizes();
    let parts: Vec<(Vec<VerificationRecord>, Vec<Skipped>)> =
        domains.par_iter().map(|d| measure_domain(d, config, &hs)).collect();
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (r, s) in parts {
        records.extend(r);
        skipped.extend(s);
    }
    records.sort_by(|a, b| a.domain_id.cmp(&b.domain_id).then(a.alpha.total_cmp(&b.alpha)));
    skipped.sort_by(|a, b| {
        a.domain_id.cmp(&b.domain_id).then(
            a.alpha_fraction
                .unwrap_or(f64::NAN)
                .total_cmp(&b.alpha_fraction.unwrap_or(f64::NAN)),
        )
    });
    Ok(SweepReport { records, skipped })
}

/// Sweep with each record's status taken from the theorem margin.
pub fn verify_theorem_2d(config: &ExperimentConfig) -> Result<SweepReport> {
    let mut r = sweep(config)?;
    for rec in &mut r.records {
        rec.status = rec.theorem_status;
    }
    Ok(r)
}

/// Sweep with each record's status taken from the lemma margin.
pub fn verify_lemma_core(config: &ExperimentConfig) -> Result<SweepReport> {
    let mut r = sweep(config)?;
    for rec in &mut r.records {
        rec.status = rec.lemma_status;
    }
    Ok(r)
}

/// One sample at an absolute `α`, which must lie in the same window as a
/// fraction would: `0 < −α < (1 − δ)·σ_safe`.
pub fn sample_at(domain: &Domain, config: &ExperimentConfig, alpha: f64) -> Result<VerificationRecord> {
    config.validate()?;
    let hs = config.mesh_sizes();
    let data = prepare(domain, &hs)?;
    let f = -alpha / data.sigma_safe;
    let limit = 1.0 - config.tolerance.window_delta;
    if !(data.sigma_safe > 0.0 && f > 0.0 && f < limit) {
        return Err(Error::OutOfRange {
            value: alpha,
            lo: -limit * data.sigma_safe,
            hi: 0.0,
        });
    }
    sample(&data, config, f, alpha)
}

struct DomainData<'a> {
    domain: &'a Domain,
    hs: &'a [f64],
    systems: Vec<FemSystem>,
    spectra: Vec<SteklovResult>,
    sigma: Extrapolation,
    tau_d: Extrapolation,
    tau_d_values: Vec<f64>,
    /// `σ₁ − budget`, the bound α must stay above in magnitude.
    sigma_safe: f64,
}

fn skip_all(domain: &Domain, fractions: &[f64], reason: String) -> Vec<Skipped> {
    log::warn!("{}: {reason}", domain.id);
    fractions
        .iter()
        .map(|&f| Skipped {
            domain_id: domain.id.clone(),
            alpha_fraction: Some(f),
            alpha: None,
            reason: reason.clone(),
        })
        .collect()
}

fn prepare<'a>(domain: &'a Domain, hs: &'a [f64]) -> Result<DomainData<'a>> {
    let systems = refinement_systems(&domain.polygon, hs)?;
    let spectra = systems
        .iter()
        .map(|s| steklov_spectrum(s, 2))
        .collect::<Result<Vec<_>>>()?;
    let sig: Vec<f64> = spectra.iter().map(|s| s.sigma1()).collect();
    let tau_d_values = systems
        .iter()
        .map(|s| solve_dirichlet_torsion(s).map(|r| r.tau))
        .collect::<Result<Vec<_>>>()?;
    let sigma = Extrapolation::new(hs, &sig)?;
    let tau_d = Extrapolation::new(hs, &tau_d_values)?;
    let lowest = sig.iter().copied().fold(sigma.extrapolated, f64::min);
    Ok(DomainData {
        domain,
        hs,
        systems,
        spectra,
        sigma_safe: lowest - sigma.budget,
        sigma,
        tau_d,
        tau_d_values,
    })
}

fn measure_domain(domain: &Domain, config: &ExperimentConfig, hs: &[f64]) -> (Vec<VerificationRecord>, Vec<Skipped>) {
    let fractions = &config.alpha_fractions;
    let data = match prepare(domain, hs) {
        Ok(d) => d,
        Err(e) => {
            return (
                Vec::new(),
                skip_all(domain, fractions, format!("discretization failed: {e}")),
            )
        }
    };
    if !(data.sigma_safe > 0.0) {
        let reason = format!(
            "σ₁ = {:e} does not exceed its budget {:e}",
            data.sigma.extrapolated, data.sigma.budget
        );
        return (Vec::new(), skip_all(domain, fractions, reason));
    }
    let delta = config.tolerance.window_delta;
    let results: Vec<std::result::Result<VerificationRecord, Skipped>> = fractions
        .par_iter()
        .map(|&f| {
            let skip = |alpha: Option<f64>, reason: String| Skipped {
                domain_id: domain.id.clone(),
                alpha_fraction: Some(f),
                alpha,
                reason,
            };
            if !(f > 0.0 && f < 1.0 - delta) {
                return Err(skip(
                    None,
                    format!("fraction {f} outside the admissible window (0, {})", 1.0 - delta),
                ));
            }
            let alpha = -f * data.sigma_safe;
            sample(&data, config, f, alpha).map_err(|e| skip(Some(alpha), e.to_string()))
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
    (records, skipped)
}

fn sample(data: &DomainData<'_>, config: &ExperimentConfig, fraction: f64, alpha: f64) -> Result<VerificationRecord> {
    let poly = &data.domain.polygon;
    let summary = summarize(poly);
    let (area, perimeter) = (summary.area, summary.perimeter);
    let mut tau = Vec::with_capacity(data.systems.len());
    for (sys, spec) in data.systems.iter().zip(&data.spectra) {
        let opts = RobinOptions {
            steklov: Some(spec),
            ..RobinOptions::default()
        };
        tau.push(solve_robin_torsion_with(sys, alpha, opts)?.tau);
    }
    let tau_a = Extrapolation::new(data.hs, &tau)?;
    let ball = BallGeometry::new(2, config.normalization.ball_radius())?;
    let tau_ball = robin_torsion_ball(&ball, alpha)?;
    let floor = config.tolerance.budget_floor;

    let theorem_margin = tau_a.extrapolated - tau_ball;
    let theorem_budget = tau_a.budget.max(floor * tau_a.extrapolated.abs().max(tau_ball.abs()));

    // extrapolating the margin itself keeps the correlated mesh error of
    // the two torsions from being counted twice
    let correction = area * area / (alpha * perimeter);
    let margins: Vec<f64> = tau
        .iter()
        .zip(&data.tau_d_values)
        .map(|(a, d)| a - d - correction)
        .collect();
    let lemma = Extrapolation::new(data.hs, &margins)?;
    let scale = tau_a.extrapolated.abs() + data.tau_d.extrapolated.abs() + correction.abs();
    let lemma_budget = lemma.budget.max(floor * scale);

    let theorem_status = Status::classify(theorem_margin, theorem_budget);
    let lemma_status = Status::classify(lemma.extrapolated, lemma_budget);
    Ok(VerificationRecord {
        domain_id: data.domain.id.clone(),
        family: data.domain.family,
        n_vertices: poly.len(),
        area,
        perimeter,
        inradius: summary.inradius,
        sigma1: data.sigma.extrapolated,
        sigma1_budget: data.sigma.budget,
        alpha_fraction: fraction,
        alpha,
        tau_alpha: tau_a.extrapolated,
        tau_alpha_budget: tau_a.budget,
        tau_ball,
        tau_dirichlet: data.tau_d.extrapolated,
        tau_dirichlet_budget: data.tau_d.budget,
        lemma_margin: lemma.extrapolated,
        lemma_budget,
        lemma_status,
        theorem_margin,
        theorem_budget,
        theorem_status,
        flagged: tau_a.flagged || lemma.flagged || data.sigma.flagged || data.tau_d.flagged,
        status: theorem_status.combine(lemma_status),
    })
}

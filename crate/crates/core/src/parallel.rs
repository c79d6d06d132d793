//! Method of parallel coordinates in the plane: a trial function whose level
//! lines are the inner parallel sets of a convex polygon, built from the
//! torsion profile of the matched annulus.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    inner_parallel_body, level_profiles, summarize, ConvexPolygon, GeometricSummary, InnerBodyProfile,
};
use crate::quadrature::{adaptive, adaptive_piecewise};
use crate::radial::{dn_torsion_shell, shell_profile, shell_profile_derivative, ShellGeometry};

/// Annulus with the area and outer perimeter of a planar domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedShell {
    pub shell: ShellGeometry,
    pub area: f64,
    pub perimeter: f64,
}

pub fn matched_shell(summary: &GeometricSummary) -> Result<MatchedShell> {
    let (a, p) = (summary.area, summary.perimeter);
    if !(a > 0.0 && p > 0.0) {
        return Err(Error::Geometry(format!("area {a} and perimeter {p} must be positive")));
    }
    let deficit = p * p - 4.0 * PI * a;
    if deficit < -1e-12 * p * p {
        return Err(Error::Geometry(format!("negative isoperimetric deficit {deficit:e}")));
    }
    let r2 = p / (2.0 * PI);
    let r1 = deficit.max(0.0).sqrt() / (2.0 * PI);
    Ok(MatchedShell {
        shell: ShellGeometry::new(2, r1, r2)?,
        area: a,
        perimeter: p,
    })
}

/// Shell profile `φ` on `[R1, R2]` and its transplant `f(ρ) = φ(R2 − ρ)`
/// to the distance from the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialProfile {
    pub shell: ShellGeometry,
    /// `u_M = φ(R1)`
    pub u_m: f64,
    /// `R2 − R1`, beyond which the trial function is constant.
    pub cap: f64,
}

impl TrialProfile {
    pub fn new(shell: &MatchedShell) -> Self {
        let s = shell.shell;
        Self {
            shell: s,
            u_m: shell_profile(&s, s.inner),
            cap: s.outer - s.inner,
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        shell_profile(&self.shell, r.clamp(self.shell.inner, self.shell.outer))
    }

    pub fn phi_prime(&self, r: f64) -> f64 {
        shell_profile_derivative(&self.shell, r)
    }

    /// `ψ` as a function of the distance `ρ` to the boundary.
    pub fn f(&self, rho: f64) -> f64 {
        if rho >= self.cap {
            self.u_m
        } else {
            self.phi(self.shell.outer - rho)
        }
    }

    pub fn f_prime(&self, rho: f64) -> f64 {
        if rho >= self.cap {
            0.0
        } else {
            -self.phi_prime(self.shell.outer - rho)
        }
    }

    /// Radius `r(s) ∈ [R1, R2]` with `φ(r) = s`, by bisection.
    pub fn radius_at_level(&self, s: f64) -> f64 {
        let (mut lo, mut hi) = (self.shell.inner, self.shell.outer);
        if s <= 0.0 {
            return hi;
        }
        if s >= self.u_m {
            return lo;
        }
        while hi - lo > 1e-13 * self.shell.outer {
            let mid = 0.5 * (lo + hi);
            if self.phi(mid) > s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub summary: GeometricSummary,
    pub shell: MatchedShell,
    pub u_m: f64,
    /// `ψ_M = f(min(r_Ω, R2 − R1))`
    pub psi_m: f64,
    /// `∫_Ω ψ`
    pub numerator: f64,
    /// `∫_Ω |∇ψ|²`
    pub energy: f64,
    /// `(∫ψ)² / ∫|∇ψ|²`
    pub bound: f64,
    pub tau_dn: f64,
    pub levels: Vec<f64>,
    pub mu: Vec<f64>,
    pub eta: Vec<f64>,
    pub pass: bool,
}

struct Setup {
    summary: GeometricSummary,
    shell: MatchedShell,
    trial: TrialProfile,
    profile: InnerBodyProfile,
}

fn setup(poly: &ConvexPolygon) -> Result<Setup> {
    let summary = summarize(poly);
    let shell = matched_shell(&summary)?;
    let trial = TrialProfile::new(&shell);
    let profile = level_profiles(poly, &[])?;
    Ok(Setup {
        summary,
        shell,
        trial,
        profile,
    })
}

impl Setup {
    fn breaks(&self, upper: f64) -> Vec<f64> {
        let mut b: Vec<f64> = self.profile.breakpoints().into_iter().filter(|&t| t < upper).collect();
        if self.trial.cap < upper && !b.contains(&self.trial.cap) {
            b.push(self.trial.cap);
        }
        b.push(upper);
        b.sort_by(f64::total_cmp);
        b
    }

    fn tol(&self) -> f64 {
        1e-11 * self.summary.area * self.trial.u_m.max(f64::MIN_POSITIVE)
    }

    fn numerator(&self) -> Result<f64> {
        let r = self.profile.inradius;
        adaptive_piecewise(
            &|t| self.trial.f(t) * self.profile.perimeter_at(t),
            &self.breaks(r),
            self.tol(),
        )
    }

    fn energy(&self) -> Result<f64> {
        let upper = self.profile.inradius.min(self.trial.cap);
        adaptive_piecewise(
            &|t| {
                let fp = self.trial.f_prime(t);
                fp * fp * self.profile.perimeter_at(t)
            },
            &self.breaks(upper),
            self.tol(),
        )
    }

    fn psi_m(&self) -> f64 {
        self.trial.f(self.profile.inradius.min(self.trial.cap))
    }
}

/// Rayleigh-quotient lower bound on the Dirichlet torsion, evaluated by the
/// coarea formula along inner parallel sets.
pub fn dirichlet_lower_bound(poly: &ConvexPolygon) -> Result<LowerBoundReport> {
    let s = setup(poly)?;
    let numerator = s.numerator()?;
    let energy = s.energy()?;
    let bound = numerator * numerator / energy;
    let tau_dn = dn_torsion_shell(&s.shell.shell);
    let psi_m = s.psi_m();
    let levels: Vec<f64> = (0..32).map(|i| psi_m * i as f64 / 32.0).collect();
    let (mu, eta) = measures(poly, &s, &levels)?;
    Ok(LowerBoundReport {
        summary: s.summary,
        shell: s.shell,
        u_m: s.trial.u_m,
        psi_m,
        numerator,
        energy,
        bound,
        tau_dn,
        pass: bound >= tau_dn * (1.0 - 1e-8),
        levels,
        mu,
        eta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureProfiles {
    pub levels: Vec<f64>,
    /// `|{ψ > s}|`
    pub mu: Vec<f64>,
    /// `|{u > s}|` in the matched annulus
    pub eta: Vec<f64>,
    /// `|∂{ψ > s}|`
    pub level_perimeter: Vec<f64>,
    /// `2π r(s)`, the outer circle of `{u > s}` with the hole filled
    pub shell_perimeter: Vec<f64>,
    pub psi_m: f64,
    pub pass: bool,
}

fn measures(poly: &ConvexPolygon, s: &Setup, levels: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let r1 = s.shell.shell.inner;
    let mut mu = Vec::with_capacity(levels.len());
    let mut eta = Vec::with_capacity(levels.len());
    for &lv in levels {
        let r = s.trial.radius_at_level(lv);
        let rho = s.shell.shell.outer - r;
        let body = inner_parallel_body(poly, rho.max(0.0))?;
        mu.push(body.map_or(0.0, |b| b.area()));
        eta.push(PI * (r * r - r1 * r1));
    }
    Ok((mu, eta))
}

/// Superlevel measures of the trial function and of the shell solution.
pub fn measure_profiles(poly: &ConvexPolygon, levels: &[f64]) -> Result<MeasureProfiles> {
    let s = setup(poly)?;
    let psi_m = s.psi_m();
    if let Some(&bad) = levels.iter().find(|&&l| !(l >= 0.0 && l < psi_m)) {
        return Err(Error::OutOfRange {
            value: bad,
            lo: 0.0,
            hi: psi_m,
        });
    }
    let (mu, eta) = measures(poly, &s, levels)?;
    let mut level_perimeter = Vec::with_capacity(levels.len());
    let mut shell_perimeter = Vec::with_capacity(levels.len());
    for &lv in levels {
        let r = s.trial.radius_at_level(lv);
        level_perimeter.push(s.profile.perimeter_at(s.shell.shell.outer - r));
        shell_perimeter.push(2.0 * PI * r);
    }
    let scale = s.summary.area;
    let pass = mu.iter().zip(&eta).all(|(m, e)| *m >= e - 1e-10 * scale)
        && level_perimeter
            .iter()
            .zip(&shell_perimeter)
            .all(|(a, b)| *a <= b + 1e-10 * s.summary.perimeter);
    Ok(MeasureProfiles {
        levels: levels.to_vec(),
        mu,
        eta,
        level_perimeter,
        shell_perimeter,
        psi_m,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyComparison {
    pub psi_energy: f64,
    pub shell_energy: f64,
    pub psi_integral: f64,
    pub shell_integral: f64,
    /// `∫_A |∇u|² − ∫_Ω |∇ψ|²`
    pub energy_margin: f64,
    /// `∫_Ω ψ − ∫_A u`
    pub integral_margin: f64,
    pub pass: bool,
}

pub fn energy_comparison(poly: &ConvexPolygon) -> Result<EnergyComparison> {
    let s = setup(poly)?;
    let psi_energy = s.energy()?;
    let psi_integral = s.numerator()?;
    let sh = s.shell.shell;
    let tol = s.tol();
    let shell_energy = 2.0
        * PI
        * adaptive(
            &|r| {
                let d = shell_profile_derivative(&sh, r);
                d * d * r
            },
            sh.inner,
            sh.outer,
            tol,
        )?;
    let shell_integral = 2.0 * PI * adaptive(&|r| shell_profile(&sh, r) * r, sh.inner, sh.outer, tol)?;
    let slack = 1e-9 * shell_integral;
    let energy_margin = shell_energy - psi_energy;
    let integral_margin = psi_integral - shell_integral;
    Ok(EnergyComparison {
        psi_energy,
        shell_energy,
        psi_integral,
        shell_integral,
        energy_margin,
        integral_margin,
        pass: energy_margin >= -slack && integral_margin >= -slack,
    })
}

use serde::{Deserialize, Serialize};

use super::{discretize, solve_dirichlet_torsion, solve_robin_torsion, steklov_spectrum, FemSystem};
use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;

/// Relative size below which an increment is treated as rounding.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Richardson estimate from a refinement sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub h: Vec<f64>,
    pub values: Vec<f64>,
    pub extrapolated: f64,
    /// Three times the last increment, or the inflated bar when flagged.
    /// Sequences whose Richardson correction would exceed `3|d₂|` are
    /// flagged and reported unextrapolated.
    pub budget: f64,
    /// Per-level bars `3|qₖ − qₖ₋₁|`.
    pub bars: Vec<f64>,
    pub order: Option<f64>,
    /// Increments changed sign or failed to shrink.
    pub flagged: bool,
}

impl Extrapolation {
    /// `h` must be a decreasing geometric sequence of at least 3 sizes.
    pub fn new(h: &[f64], values: &[f64]) -> Result<Self> {
        let ratio = check_sequence(h)?;
        if values.len() != h.len() {
            return Err(Error::Refinement(format!(
                "{} sizes but {} values",
                h.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Refinement("non-finite value in sequence".into()));
        }
        let n = values.len();
        let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let bars: Vec<f64> = inc.iter().map(|d| 3.0 * d.abs()).collect();
        let (d1, d2) = (inc[n - 3], inc[n - 2]);
        let q = values[n - 1];
        // increments at this level are solver rounding, not discretization
        let floor = ROUNDING_FLOOR * values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let noise = |d: f64| d.abs() <= floor;
        let mut flagged = inc
            .windows(2)
            .any(|w| !(noise(w[0]) && noise(w[1])) && (w[0] * w[1] < 0.0 || w[1].abs() > w[0].abs()));
        let (extrapolated, budget, order) = if noise(d1) && noise(d2) {
            (q, 3.0 * d1.abs().max(d2.abs()), None)
        } else if d1 * d2 > 0.0 && d2.abs() < d1.abs() {
            let p = (d1 / d2).ln() / ratio.ln();
            let correction = d2 / (ratio.powf(p) - 1.0);
            if correction.abs() <= 3.0 * d2.abs() {
                (q + correction, 3.0 * d2.abs(), Some(p))
            } else {
                // the step would leave its own bar: too slow to trust
                flagged = true;
                (q, 3.0 * d1.abs(), Some(p))
            }
        } else {
            flagged = true;
            (q, 3.0 * d1.abs().max(d2.abs()), None)
        };
        Ok(Extrapolation {
            h: h.to_vec(),
            values: values.to_vec(),
            extrapolated,
            budget,
            bars,
            order,
            flagged,
        })
    }

    /// Whether `x` lies within the budget of the extrapolated value.
    pub fn brackets(&self, x: f64) -> bool {
        (x - self.extrapolated).abs() <= self.budget
    }
}

fn check_sequence(h: &[f64]) -> Result<f64> {
    if h.len() < 3 {
        return Err(Error::Refinement(format!(
            "need at least 3 mesh sizes, got {}",
            h.len()
        )));
    }
    if h.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::Refinement("mesh sizes must be positive".into()));
    }
    let r = h[0] / h[1];
    if !(r > 1.0) {
        return Err(Error::Refinement("mesh sizes must decrease".into()));
    }
    for w in h.windows(2) {
        if ((w[0] / w[1]) / r - 1.0).abs() > 1e-9 {
            return Err(Error::Refinement(format!(
                "sizes {h:?} are not in geometric progression"
            )));
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// `None` for Dirichlet.
    pub alpha: Option<f64>,
    pub tau: Extrapolation,
    pub sigma1: Extrapolation,
    pub n_nodes: Vec<usize>,
}

/// One assembled system per mesh size.
pub fn refinement_systems(poly: &ConvexPolygon, h_sequence: &[f64]) -> Result<Vec<FemSystem>> {
    check_sequence(h_sequence)?;
    h_sequence.iter().map(|&h| discretize(poly, h)).collect()
}

/// Torsion (Robin for `Some(α)`, Dirichlet for `None`) and `σ₁` over a
/// refinement sequence, extrapolated.
pub fn error_budget(poly: &ConvexPolygon, alpha: Option<f64>, h_sequence: &[f64]) -> Result<ErrorBudget> {
    let systems = refinement_systems(poly, h_sequence)?;
    let mut tau = Vec::new();
    let mut sigma = Vec::new();
    for sys in &systems {
        sigma.push(steklov_spectrum(sys, 2)?.sigma1());
        tau.push(match alpha {
            Some(a) => solve_robin_torsion(sys, a)?.tau,
            None => solve_dirichlet_torsion(sys)?.tau,
        });
    }
    Ok(ErrorBudget {
        alpha,
        tau: Extrapolation::new(h_sequence, &tau)?,
        sigma1: Extrapolation::new(h_sequence, &sigma)?,
        n_nodes: systems.iter().map(|s| s.n()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn synthetic_quadratic() {
        let h = [0.4, 0.2, 0.1];
        let v: Vec<f64> = h.iter().map(|x| 1.0 + 0.5 * x * x).collect();
        let e = Extrapolation::new(&h, &v).unwrap();
        assert!((e.order.unwrap() - 2.0).abs() < 1e-9);
        assert!((e.extrapolated - 1.0).abs() < 1e-12);
        assert!(!e.flagged && e.brackets(1.0));
    }

    #[test]
    fn oscillation_is_flagged() {
        let e = Extrapolation::new(&[1.0, 0.5, 0.25], &[1.0, 1.1, 1.05]).unwrap();
        assert!(e.flagged && e.order.is_none());
        assert!((e.budget - 0.3).abs() < 1e-12);
    }

    #[test]
    fn slow_sequence_is_not_extrapolated() {
        let v = [7.96e-5, 6.54e-5, 5.15e-5];
        let e = Extrapolation::new(&[0.2, 0.1, 0.05], &v).unwrap();
        assert!(e.flagged && e.order.unwrap() < 0.1);
        assert_eq!(e.extrapolated, v[2]);
        assert!((e.budget - 3.0 * 1.42e-5).abs() < 1e-12);
    }

    #[test]
    fn bad_sequences() {
        assert!(Extrapolation::new(&[1.0, 0.5], &[1.0, 1.0]).is_err());
        assert!(Extrapolation::new(&[1.0, 0.5, 0.3], &[1.0, 1.0, 1.0]).is_err());
        assert!(Extrapolation::new(&[0.25, 0.5, 1.0], &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn disk_dirichlet_budget() {
        let poly = ConvexPolygon::regular(256, 1.0).unwrap();
        let b = error_budget(&poly, None, &[0.25, 0.125, 0.0625]).unwrap();
        assert!(b.tau.brackets(PI / 8.0), "{:?}", b.tau);
        assert!(b.tau.order.unwrap() > 1.8, "{:?}", b.tau);
        // the linear first mode is captured exactly, so σ₁ may already sit
        // at rounding level; otherwise the bars must shrink
        let s = &b.sigma1;
        assert!(!s.flagged, "{s:?}");
        assert!(s.bars[1] < s.bars[0] || s.bars[1] < 1e-12 * s.values[2], "{s:?}");
        assert!((b.sigma1.values[2] - 1.0).abs() < 0.01);
    }
}

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ConvexPolygon, GeometricSummary, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinerCheck {
    pub rho: f64,
    /// Area of `K + ρB₁` from its boundary (offset edges and arcs).
    pub geometric: f64,
    /// `|K| + |∂K|ρ + πρ²`
    pub polynomial: f64,
    pub rel_diff: f64,
    /// `(|∂(K+ρB₁)| − |∂K|)/ρ`, which equals `2π`; NaN at ρ = 0.
    pub perimeter_slope: f64,
    pub pass: bool,
}

/// Outer parallel body area two ways: Green's theorem over the offset
/// boundary, and the planar Steiner polynomial.
pub fn steiner_outer_check(poly: &ConvexPolygon, rho: f64) -> Result<SteinerCheck> {
    if !(rho >= 0.0) {
        return Err(Error::InvalidInput(format!("rho must be nonnegative, got {rho}")));
    }
    let v = poly.vertices();
    let n = v.len();
    let normal = |i: usize| {
        let e = v[(i + 1) % n] - v[i];
        let l = e.norm();
        Point::new(e.y / l, -e.x / l)
    };
    let mut twice_area = 0.0;
    let mut outer_perimeter = 0.0;
    for i in 0..n {
        let nrm = normal(i);
        let p = v[i] + nrm * rho;
        let q = v[(i + 1) % n] + nrm * rho;
        twice_area += p.cross(q);
        outer_perimeter += p.dist(q);
        // arc around v[i+1] from this edge's normal to the next one's
        let c = v[(i + 1) % n];
        let next = normal((i + 1) % n);
        let a0 = nrm.y.atan2(nrm.x);
        let mut sweep = next.y.atan2(next.x) - a0;
        if sweep < 0.0 {
            sweep += 2.0 * PI;
        }
        let u0 = nrm;
        let u1 = next;
        twice_area += rho * c.cross(u1 - u0) + rho * rho * sweep;
        outer_perimeter += rho * sweep;
    }
    let geometric = 0.5 * twice_area;
    let polynomial = poly.area() + poly.perimeter() * rho + PI * rho * rho;
    let rel_diff = (geometric - polynomial).abs() / polynomial;
    let perimeter_slope = (outer_perimeter - poly.perimeter()) / rho;
    Ok(SteinerCheck {
        rho,
        geometric,
        polynomial,
        rel_diff,
        perimeter_slope,
        pass: rel_diff <= 1e-10,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    /// `|∂K|² − 4π|K|`
    pub isoperimetric_deficit: f64,
    pub relative_deficit: f64,
    /// `W₁² − W₀W₂`
    pub aleksandrov_fenchel_deficit: f64,
    pub w2: f64,
    /// `0 < r_Ω ≤ |∂Ω|/(2π)` and `r_Ω |∂Ω|/2 ≤ |Ω|`
    pub inradius_ok: bool,
    pub pass: bool,
}

pub fn inequality_checks(s: &GeometricSummary) -> InequalityReport {
    let iso = s.perimeter * s.perimeter - 4.0 * PI * s.area;
    let scale = s.perimeter * s.perimeter;
    let [w0, w1, w2] = s.quermass;
    let af = w1 * w1 - w0 * w2;
    let tol = 1e-12 * scale;
    let inradius_ok = s.inradius > 0.0
        && s.inradius <= s.perimeter / (2.0 * PI) * (1.0 + 1e-12)
        && s.inradius * s.perimeter / 2.0 <= s.area * (1.0 + 1e-9);
    InequalityReport {
        isoperimetric_deficit: iso,
        relative_deficit: iso / scale,
        aleksandrov_fenchel_deficit: af,
        w2,
        inradius_ok,
        pass: iso >= -tol && af >= -tol && w2 == PI && inradius_ok,
    }
}

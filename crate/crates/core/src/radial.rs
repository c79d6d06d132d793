//! Closed-form radial quantities: Robin and Dirichlet torsion of balls,
//! Dirichlet–Neumann torsion of spherical shells, the ball Steklov spectrum
//! and the radial solution profiles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gl32;

/// Relative tolerance for flagging `-alpha ≈ k/R`.
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-9;

/// Shells with `R1/R2` at or above this ratio are integrated from the
/// positive energy density rather than the closed form.
const THIN_SHELL_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallGeometry {
    pub dim: u32,
    pub radius: f64,
}

impl BallGeometry {
    pub fn new(dim: u32, radius: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidDimension(dim as i64));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { dim, radius })
    }

    pub fn volume(&self) -> f64 {
        dimensional_constants(self.dim).ball_volume * self.radius.powi(self.dim as i32)
    }

    pub fn surface(&self) -> f64 {
        dimensional_constants(self.dim).sphere_area * self.radius.powi(self.dim as i32 - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellGeometry {
    pub dim: u32,
    pub inner: f64,
    pub outer: f64,
}

impl ShellGeometry {
    pub fn new(dim: u32, inner: f64, outer: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim as i64));
        }
        if !(outer > 0.0 && outer.is_finite()) || !(inner >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "shell radii must satisfy 0 <= R1 < R2, got R1 = {inner}, R2 = {outer}"
            )));
        }
        if inner >= outer {
            return Err(Error::DegenerateShell { r1: inner, r2: outer });
        }
        Ok(Self { dim, inner, outer })
    }

    /// `t = R1 / R2` in [0, 1).
    pub fn ratio(&self) -> f64 {
        self.inner / self.outer
    }

    pub fn volume(&self) -> f64 {
        let d = self.dim as i32;
        let w = one_minus_pow(self.ratio(), self.dim);
        dimensional_constants(self.dim).ball_volume * self.outer.powi(d) * w
    }

    /// Area of the outer sphere.
    pub fn outer_surface(&self) -> f64 {
        dimensional_constants(self.dim).sphere_area * self.outer.powi(self.dim as i32 - 1)
    }
}

/// A nonzero Robin parameter together with its proximity to the ball
/// Steklov spectrum `{k/R}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobinParameter {
    pub alpha: f64,
    pub resonance_flag: bool,
}

impl RobinParameter {
    pub fn new(alpha: f64, ball: &BallGeometry) -> Result<Self> {
        Self::with_tolerance(alpha, ball, DEFAULT_RESONANCE_TOL)
    }

    pub fn with_tolerance(alpha: f64, ball: &BallGeometry, rel_tol: f64) -> Result<Self> {
        if alpha == 0.0 {
            return Err(Error::NeumannCase);
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must be finite, got {alpha}")));
        }
        let scaled = -alpha * ball.radius;
        let k = scaled.round();
        let resonance_flag = k >= 1.0 && (scaled - k).abs() <= rel_tol * k;
        Ok(Self { alpha, resonance_flag })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalConstants {
    /// `|S^{d-1}|`
    pub sphere_area: f64,
    /// `|B_1|`
    pub ball_volume: f64,
}

/// `|B_1|` by the recursion `V_d = 2π/d · V_{d-2}`, and `|S^{d-1}| = d V_d`.
pub fn dimensional_constants(d: u32) -> DimensionalConstants {
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    DimensionalConstants {
        sphere_area: d as f64 * v,
        ball_volume: v,
    }
}

/// Checked variant for untrusted dimensions.
pub fn try_dimensional_constants(d: i64) -> Result<DimensionalConstants> {
    if d < 1 || d > u32::MAX as i64 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(dimensional_constants(d as u32))
}

pub fn robin_torsion_ball(ball: &BallGeometry, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::NeumannCase);
    }
    let d = ball.dim as f64;
    let r = ball.radius;
    let s = dimensional_constants(ball.dim).sphere_area;
    Ok(s * r.powi(ball.dim as i32 + 1) / (d * d) * (r / (d + 2.0) + 1.0 / alpha))
}

pub fn dirichlet_torsion_ball(ball: &BallGeometry) -> f64 {
    let d = ball.dim as f64;
    dimensional_constants(ball.dim).sphere_area * ball.radius.powi(ball.dim as i32 + 2) / (d * d * (d + 2.0))
}

/// The parameter at which the ball's Robin torsion vanishes, `-(d+2)/R`.
pub fn critical_alpha(ball: &BallGeometry) -> f64 {
    -(ball.dim as f64 + 2.0) / ball.radius
}

pub fn steklov_ball(ball: &BallGeometry, k: i64) -> Result<f64> {
    if k < 0 {
        return Err(Error::InvalidInput(format!("Steklov index must be >= 0, got {k}")));
    }
    Ok(k as f64 / ball.radius)
}

/// `1 - t^d` without cancellation for t near 1.
pub(crate) fn one_minus_pow(t: f64, d: u32) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    -((d as f64) * t.ln()).exp_m1()
}

/// Torsion of the shell with Dirichlet data on the outer sphere and Neumann
/// data on the inner one.
pub fn dn_torsion_shell(shell: &ShellGeometry) -> f64 {
    let d = shell.dim;
    let (r1, r2) = (shell.inner, shell.outer);
    if r1 == 0.0 {
        return dirichlet_torsion_ball(&BallGeometry { dim: d, radius: r2 });
    }
    let t = r1 / r2;
    if t >= THIN_SHELL_RATIO {
        return dn_torsion_shell_energy(shell);
    }
    let df = d as f64;
    if d == 2 {
        let r14 = r1.powi(4);
        PI / 8.0 * (4.0 * r14 * (-t.ln()) + 3.0 * r14 - 4.0 * r1 * r1 * r2 * r2 + r2.powi(4))
    } else {
        let s = dimensional_constants(d).sphere_area;
        let di = d as i32;
        let f = 1.0 / (df * df * (df + 2.0)) + t.powi(di + 2) / (df * df - 4.0)
            - t.powi(di) / (df * df)
            - t.powi(2 * di) / (df * df * (df - 2.0));
        s * r2.powi(di + 2) * f
    }
}

/// `τ_DN = |S^{d-1}|/d² ∫_{R1}^{R2} (r^d − R1^d)² r^{1−d} dr`, i.e. the
/// Dirichlet energy of the shell solution; the integrand is nonnegative so
/// thin shells lose no digits.
pub(crate) fn dn_torsion_shell_energy(shell: &ShellGeometry) -> f64 {
    let d = shell.dim;
    let df = d as f64;
    let (r1, r2) = (shell.inner, shell.outer);
    let s = dimensional_constants(d).sphere_area;
    let r1d = r1.powi(d as i32);
    let integrand = |r: f64| {
        // r^d − R1^d = R1^d · expm1(d · log1p((r − R1)/R1))
        let diff = if r1 > 0.0 {
            r1d * (df * ((r - r1) / r1).ln_1p()).exp_m1()
        } else {
            r.powi(d as i32)
        };
        diff * diff * r.powi(1 - d as i32)
    };
    s / (df * df) * gl32().integrate(r1, r2, integrand)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RadialDomain {
    Ball(BallGeometry),
    Shell(ShellGeometry),
}

/// Sign structure of the ball solution `(R²−r²)/(2d) + R/(αd)`.
///
/// Negativity holds exactly for `α ∈ [−2/R, 0)`; the centre value is zero at
/// the left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignClass {
    AllPositive,
    AllNegative,
    SignChanging,
}

pub fn ball_sign_class(ball: &BallGeometry, alpha: f64) -> Result<SignClass> {
    if alpha == 0.0 {
        return Err(Error::NeumannCase);
    }
    if alpha > 0.0 {
        Ok(SignClass::AllPositive)
    } else if alpha >= -2.0 / ball.radius {
        Ok(SignClass::AllNegative)
    } else {
        Ok(SignClass::SignChanging)
    }
}

/// Radial profile of the torsion function: the Robin ball solution (needs
/// `alpha`) or the Dirichlet–Neumann shell solution (ignores `alpha`).
pub fn radial_solution(domain: &RadialDomain, alpha: Option<f64>, r: f64) -> Result<f64> {
    match domain {
        RadialDomain::Ball(ball) => {
            let alpha = alpha.ok_or(Error::NeumannCase)?;
            if alpha == 0.0 {
                return Err(Error::NeumannCase);
            }
            let big_r = ball.radius;
            if !(0.0..=big_r).contains(&r) {
                return Err(Error::OutOfRange {
                    value: r,
                    lo: 0.0,
                    hi: big_r,
                });
            }
            let d = ball.dim as f64;
            Ok((big_r * big_r - r * r) / (2.0 * d) + big_r / (alpha * d))
        }
        RadialDomain::Shell(shell) => {
            if !(shell.inner..=shell.outer).contains(&r) {
                return Err(Error::OutOfRange {
                    value: r,
                    lo: shell.inner,
                    hi: shell.outer,
                });
            }
            Ok(shell_profile(shell, r))
        }
    }
}

/// Shell profile φ(r) for R1 ≤ r ≤ R2 without range checks.
pub(crate) fn shell_profile(shell: &ShellGeometry, r: f64) -> f64 {
    let d = shell.dim;
    let df = d as f64;
    let (r1, r2) = (shell.inner, shell.outer);
    let base = (r2 * r2 - r * r) / (2.0 * df);
    if r1 == 0.0 {
        return base;
    }
    if d == 2 {
        base + 0.5 * r1 * r1 * (r / r2).ln()
    } else {
        let di = d as i32;
        base + r1.powi(di) / ((df - 2.0) * df) * (r2.powi(2 - di) - r.powi(2 - di))
    }
}

/// φ'(r) = −(r^d − R1^d)/(d r^{d−1}).
pub(crate) fn shell_profile_derivative(shell: &ShellGeometry, r: f64) -> f64 {
    let d = shell.dim as i32;
    -(r.powi(d) - shell.inner.powi(d)) / (shell.dim as f64 * r.powi(d - 1))
}

/// Maximum of the shell solution, `u_M = φ(R1)`.
pub fn shell_plateau(shell: &ShellGeometry) -> f64 {
    shell_profile(shell, shell.inner)
}

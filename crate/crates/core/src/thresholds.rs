//! Smallness thresholds on `−αR`, the auxiliary lemma functions
//! f, g, h, k, m, M and their certified sign structure, and the
//! quantitative gap between a ball and its matched shell.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dd::DD;
use crate::error::{Error, Result};
use crate::radial::{dimensional_constants, ShellGeometry};

/// Isoperimetric (fixed perimeter) or isochoric (fixed volume) comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    Perimeter,
    #[serde(alias = "area")]
    Volume,
}

impl Constraint {
    pub fn name(self) -> &'static str {
        match self {
            Constraint::Perimeter => "perimeter",
            Constraint::Volume => "volume",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Constraint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "perimeter" => Ok(Constraint::Perimeter),
            "volume" | "area" => Ok(Constraint::Volume),
            other => Err(Error::Config(format!("unknown constraint '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdKind {
    PlanarPerimeter,
    #[serde(rename = "3d-perimeter")]
    ThreeDPerimeter,
    #[serde(rename = "3d-volume")]
    ThreeDVolume,
    GeneralPerimeter,
    GeneralVolume,
}

impl ThresholdKind {
    pub const ALL: [ThresholdKind; 5] = [
        ThresholdKind::PlanarPerimeter,
        ThresholdKind::ThreeDPerimeter,
        ThresholdKind::ThreeDVolume,
        ThresholdKind::GeneralPerimeter,
        ThresholdKind::GeneralVolume,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ThresholdKind::PlanarPerimeter => "planar-perimeter",
            ThresholdKind::ThreeDPerimeter => "3d-perimeter",
            ThresholdKind::ThreeDVolume => "3d-volume",
            ThresholdKind::GeneralPerimeter => "general-perimeter",
            ThresholdKind::GeneralVolume => "general-volume",
        }
    }

    /// Certified lower bound of the threshold over (0, 1).
    pub fn bound(self) -> f64 {
        match self {
            ThresholdKind::PlanarPerimeter => 4.0,
            ThresholdKind::ThreeDPerimeter => 2.0,
            ThresholdKind::ThreeDVolume => 1.0,
            ThresholdKind::GeneralPerimeter => 2.0,
            ThresholdKind::GeneralVolume => 1.0,
        }
    }

    /// The planar threshold bounds `−2αR`; every other kind bounds `−αR`.
    pub fn alpha_r_factor(self) -> f64 {
        match self {
            ThresholdKind::PlanarPerimeter => 2.0,
            _ => 1.0,
        }
    }

    pub fn fixed_dim(self) -> Option<u32> {
        match self {
            ThresholdKind::PlanarPerimeter => Some(2),
            ThresholdKind::ThreeDPerimeter | ThresholdKind::ThreeDVolume => Some(3),
            _ => None,
        }
    }

    pub fn constraint(self) -> Constraint {
        match self {
            ThresholdKind::PlanarPerimeter | ThresholdKind::ThreeDPerimeter | ThresholdKind::GeneralPerimeter => {
                Constraint::Perimeter
            }
            ThresholdKind::ThreeDVolume | ThresholdKind::GeneralVolume => Constraint::Volume,
        }
    }

    /// The kind covering a (dimension, constraint) pair, if any.
    pub fn for_dim(d: u32, constraint: Constraint) -> Option<ThresholdKind> {
        match (d, constraint) {
            (2, Constraint::Perimeter) => Some(ThresholdKind::PlanarPerimeter),
            (2, Constraint::Volume) => None,
            (3, Constraint::Perimeter) => Some(ThresholdKind::ThreeDPerimeter),
            (3, Constraint::Volume) => Some(ThresholdKind::ThreeDVolume),
            (d, Constraint::Perimeter) if d >= 3 => Some(ThresholdKind::GeneralPerimeter),
            (d, Constraint::Volume) if d >= 3 => Some(ThresholdKind::GeneralVolume),
            _ => None,
        }
    }

    fn check_dim(self, d: u32) -> Result<()> {
        match self.fixed_dim() {
            Some(fixed) if fixed != d => Err(Error::InvalidInput(format!(
                "{} is defined for d = {fixed} only, got d = {d}",
                self.name()
            ))),
            None if d < 3 => Err(Error::InvalidDimension(d as i64)),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThresholdKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ThresholdKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown threshold kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdValue {
    pub value: f64,
    /// Set when `t` is an endpoint and the value is the one-sided limit.
    pub limit: bool,
}

/// Threshold value at `t ∈ [0, 1]`; endpoints return the one-sided limits.
pub fn threshold(kind: ThresholdKind, d: u32, t: f64) -> Result<ThresholdValue> {
    kind.check_dim(d)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange {
            value: t,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let df = d as f64;
    if t == 0.0 {
        let value = match kind {
            ThresholdKind::PlanarPerimeter => 4.0,
            ThresholdKind::ThreeDPerimeter | ThresholdKind::GeneralPerimeter => 2.0,
            ThresholdKind::ThreeDVolume | ThresholdKind::GeneralVolume => 1.0,
        };
        return Ok(ThresholdValue { value, limit: true });
    }
    if t == 1.0 {
        let value = match kind {
            ThresholdKind::PlanarPerimeter => 8.0,
            ThresholdKind::ThreeDPerimeter | ThresholdKind::ThreeDVolume => 5.0,
            ThresholdKind::GeneralPerimeter | ThresholdKind::GeneralVolume => df + 2.0,
        };
        return Ok(ThresholdValue { value, limit: true });
    }
    let value = match kind {
        ThresholdKind::PlanarPerimeter => {
            let t2 = t * t;
            (2.0 - t2) / (0.5 + 0.5 * t2 * t.ln() - 0.375 * t2)
        }
        ThresholdKind::ThreeDPerimeter => {
            let t3 = t * t * t;
            5.0 * (2.0 - t3) / (5.0 - 9.0 * t * t + 5.0 * t3)
        }
        ThresholdKind::GeneralPerimeter => {
            let td = t.powi(d as i32);
            let a = df * df - 4.0;
            a * (2.0 - td) / (a - df * df * t * t + (df + 2.0) * td)
        }
        ThresholdKind::ThreeDVolume => volume_threshold_3d(t),
        ThresholdKind::GeneralVolume => volume_threshold_general(d, t),
    };
    if !value.is_finite() {
        return Err(Error::InvalidInput(format!(
            "{} threshold not finite at d = {d}, t = {t}",
            kind.name()
        )));
    }
    Ok(ThresholdValue { value, limit: false })
}

/// Threshold expressed as a bound on `−αR` for every kind.
pub fn threshold_on_alpha_r(kind: ThresholdKind, d: u32, t: f64) -> Result<f64> {
    Ok(threshold(kind, d, t)?.value / kind.alpha_r_factor())
}

/// Below this `t^d` the volume thresholds equal their two-term series to
/// working precision.
const VOLUME_SERIES_CUTOFF: f64 = 1e-280;

fn volume_series(d: u32, t: f64) -> f64 {
    let df = d as f64;
    1.0 + df.powi(3) * t * t / ((df * df - 4.0) * (df - 1.0))
}

fn volume_threshold_3d(t: f64) -> f64 {
    if t.powi(3) < VOLUME_SERIES_CUTOFF {
        return volume_series(3, t);
    }
    let w = WPowers::new(3, t);
    let td = DD::new(t).powi(3);
    let t5 = td * t * t;
    let t6 = td.sqr();
    // w^{7/3} − w^{5/3} and 1 − w^{5/3}
    let num = w.diff(7.0 / 3.0, 5.0 / 3.0) * 5.0;
    let den = t5 * 9.0 - t6 * 5.0 - td * 5.0 + w.one_minus(5.0 / 3.0);
    (num / den).to_f64()
}

fn volume_threshold_general(d: u32, t: f64) -> f64 {
    if t.powi(d as i32) < VOLUME_SERIES_CUTOFF {
        return volume_series(d, t);
    }
    let df = d as f64;
    let w = WPowers::new(d, t);
    let num = w.diff((df + 2.0) / df, (2.0 * df + 1.0) / df) * (df * df - 4.0);
    (num / g_dd(d, t, &w)).to_f64()
}

/// Powers of `w = 1 − t^d` in double-double, via `log1p(−t^d)`.
struct WPowers {
    td: DD,
    log_w: Option<DD>,
}

impl WPowers {
    fn new(d: u32, t: f64) -> Self {
        let td = DD::new(t).powi(d);
        let log_w = if t >= 1.0 { None } else { Some((-td).ln_1p()) };
        Self { td, log_w }
    }

    fn w(&self) -> DD {
        DD::ONE - self.td
    }

    /// `w^p`, p > 0
    fn pow(&self, p: f64) -> DD {
        match self.log_w {
            Some(l) => (l * p).exp(),
            None => DD::ZERO,
        }
    }

    /// `1 − w^p`, p > 0
    fn one_minus(&self, p: f64) -> DD {
        match self.log_w {
            Some(l) => -(l * p).exp_m1(),
            None => DD::ONE,
        }
    }

    /// `w^a − w^b` for 0 < a < b
    fn diff(&self, a: f64, b: f64) -> DD {
        match self.log_w {
            Some(l) => -(l * a).exp() * (l * (b - a)).exp_m1(),
            None => DD::ZERO,
        }
    }

    /// `w^p` for p possibly negative; infinite at w = 0
    fn pow_signed(&self, p: f64) -> DD {
        match self.log_w {
            Some(l) => (l * p).exp(),
            None if p > 0.0 => DD::ZERO,
            None if p == 0.0 => DD::ONE,
            None => DD::new(f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LemmaFunction {
    #[serde(rename = "f")]
    F,
    #[serde(rename = "g")]
    G,
    #[serde(rename = "h")]
    H,
    #[serde(rename = "k")]
    K,
    /// `m(t)`
    #[serde(rename = "m")]
    SmallM,
    /// `M(u) = m(t(u))` with `u = 1 − t^d`
    #[serde(rename = "M")]
    CapitalM,
}

impl LemmaFunction {
    pub const ALL: [LemmaFunction; 6] = [
        LemmaFunction::F,
        LemmaFunction::G,
        LemmaFunction::H,
        LemmaFunction::K,
        LemmaFunction::SmallM,
        LemmaFunction::CapitalM,
    ];

    pub fn id(self) -> &'static str {
        match self {
            LemmaFunction::F => "f",
            LemmaFunction::G => "g",
            LemmaFunction::H => "h",
            LemmaFunction::K => "k",
            LemmaFunction::SmallM => "m",
            LemmaFunction::CapitalM => "M",
        }
    }
}

impl fmt::Display for LemmaFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for LemmaFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LemmaFunction::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown lemma function '{s}'")))
    }
}

fn g_dd(d: u32, t: f64, w: &WPowers) -> DD {
    let df = d as f64;
    let td = w.td;
    td * (df * df - 4.0) + td.sqr() * (df + 2.0)
        - td * DD::new(t).sqr() * (df * df)
        - w.one_minus((df + 2.0) / df) * (df - 2.0)
}

fn one_minus_t2(t: f64) -> DD {
    // (1 − t)(1 + t) keeps relative accuracy near t = 1
    (DD::ONE - t) * (DD::ONE + t)
}

/// Evaluates a lemma function in double-double; `x` is `t` except for `M`
/// where it is `u`.
pub fn lemma_function_dd(id: LemmaFunction, d: u32, x: f64) -> Result<DD> {
    check_lemma_args(d, x)?;
    let df = d as f64;
    let w = WPowers::new(d, x);
    let t = x;
    Ok(match id {
        LemmaFunction::F => w.one_minus((df - 1.0) / df),
        LemmaFunction::G => g_dd(d, t, &w),
        LemmaFunction::H => one_minus_t2(t) * (df * df) - w.w() * (2.0 * df) - w.pow(2.0 / df) * (df - 2.0),
        LemmaFunction::K => w.diff(1.0 + 2.0 / df, 2.0 + 1.0 / df) * (df * df - 4.0) - g_dd(d, t, &w),
        LemmaFunction::SmallM => {
            w.pow(1.0 + 1.0 / df) * ((df - 2.0) * (2.0 * df + 1.0))
                - w.pow(2.0 / df) * ((df - 2.0) * (df + 1.0))
                - one_minus_t2(t) * (df * df)
                + w.w() * (2.0 * df)
        }
        LemmaFunction::CapitalM => {
            let u = DD::new(x);
            let one_minus_u = pow_pos(DD::ONE - x, 2.0 / df, (-u).ln_1p());
            one_minus_u * (df * df) - pow_pos(u, 2.0 / df, u.ln()) * ((df - 2.0) * (df + 1.0))
                + pow_pos(u, 1.0 + 1.0 / df, u.ln()) * (2.0 * df * df - 3.0 * df - 2.0)
                + u * (2.0 * df)
                - df * df
        }
    })
}

/// `base^p` for `base ≥ 0`, `p > 0`, given `ln(base)`.
fn pow_pos(base: DD, p: f64, ln_base: DD) -> DD {
    if base.hi <= 0.0 {
        DD::ZERO
    } else {
        (ln_base * p).exp()
    }
}

fn check_lemma_args(d: u32, x: f64) -> Result<()> {
    if d < 3 {
        return Err(Error::InvalidDimension(d as i64));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

pub fn lemma_function(id: LemmaFunction, d: u32, x: f64) -> Result<f64> {
    Ok(lemma_function_dd(id, d, x)?.to_f64())
}

/// Analytic derivative in `x`. For g and k this is the factored form
/// `(d+2) t^{d−1} h` and `(d+2) t^{d−1} m`.
pub fn lemma_derivative(id: LemmaFunction, d: u32, x: f64) -> Result<f64> {
    check_lemma_args(d, x)?;
    let df = d as f64;
    let w = WPowers::new(d, x);
    let t = DD::new(x);
    let tdm1 = t.powi(d - 1);
    let v = match id {
        LemmaFunction::F => tdm1 * (df - 1.0) * w.pow_signed(-1.0 / df),
        LemmaFunction::G => tdm1 * (df + 2.0) * lemma_function_dd(LemmaFunction::H, d, x)?,
        LemmaFunction::H => {
            t * (-2.0 * df * df) + tdm1 * (2.0 * df * df) + tdm1 * w.pow_signed(2.0 / df - 1.0) * (2.0 * (df - 2.0))
        }
        LemmaFunction::K => tdm1 * (df + 2.0) * lemma_function_dd(LemmaFunction::SmallM, d, x)?,
        LemmaFunction::SmallM => {
            -(tdm1 * w.pow(1.0 / df)) * ((df - 2.0) * (2.0 * df + 1.0) * (df + 1.0))
                + tdm1 * w.pow_signed(2.0 / df - 1.0) * (2.0 * (df - 2.0) * (df + 1.0))
                + t * (2.0 * df * df)
                - tdm1 * (2.0 * df * df)
        }
        LemmaFunction::CapitalM => {
            let u = t;
            let e = 2.0 / df - 1.0;
            let a = if x >= 1.0 {
                DD::new(f64::INFINITY)
            } else {
                ((-u).ln_1p() * e).exp()
            };
            let b = if x <= 0.0 {
                DD::new(f64::INFINITY)
            } else {
                (u.ln() * e).exp()
            };
            let c = pow_pos(u, 1.0 / df, if x > 0.0 { u.ln() } else { DD::ZERO });
            -(a * (2.0 * df)) - b * ((df - 2.0) * (df + 1.0) * 2.0 / df)
                + c * ((2.0 * df * df - 3.0 * df - 2.0) * (1.0 + 1.0 / df))
                + 2.0 * df
        }
    };
    Ok(v.to_f64())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub lo: f64,
    pub hi: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaFunctionReport {
    pub d: u32,
    pub function: LemmaFunction,
    pub value_at_0: f64,
    pub value_at_1: f64,
    pub roots: Vec<Root>,
    /// Interior zeros of the derivative, where the structure depends on them.
    pub critical_points: Vec<Root>,
    /// Sign on each interval between consecutive roots, left to right.
    pub signs: Vec<i8>,
    pub interior_min: f64,
    pub interior_max: f64,
    pub scan_nodes: usize,
    pub expected: String,
    pub structure_ok: bool,
}

pub const SCAN_NODES: usize = 4096;
pub const BISECTION_STEPS: usize = 80;

/// Sign changes of `f` over a uniform interior scan, refined by bisection.
pub fn isolate_roots<F: Fn(f64) -> DD>(f: F, nodes: usize, steps: usize) -> Vec<Root> {
    let xs: Vec<f64> = (1..=nodes).map(|i| i as f64 / (nodes + 1) as f64).collect();
    let vals: Vec<DD> = xs.iter().map(|&x| f(x)).collect();
    let sign = |v: DD| -> i8 {
        if v.hi > 0.0 {
            1
        } else if v.hi < 0.0 {
            -1
        } else {
            0
        }
    };
    let mut roots = Vec::new();
    for i in 0..xs.len() {
        if sign(vals[i]) == 0 {
            roots.push(Root {
                lo: xs[i],
                hi: xs[i],
                x: xs[i],
            });
            continue;
        }
        if i + 1 < xs.len() && sign(vals[i]) * sign(vals[i + 1]) < 0 {
            let (mut lo, mut hi) = (xs[i], xs[i + 1]);
            let s_lo = sign(vals[i]);
            for _ in 0..steps {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let s = sign(f(mid));
                if s == 0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if s == s_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(Root {
                lo,
                hi,
                x: 0.5 * (lo + hi),
            });
        }
    }
    roots
}

/// Scans a lemma function and checks the sign structure its lemma relies on:
/// h has one root; g > 0 with one maximum; k > 0 with one maximum; m and M
/// have one root and M has two critical points; f > 0.
pub fn sign_pattern(id: LemmaFunction, d: u32) -> Result<LemmaFunctionReport> {
    if d < 3 {
        return Err(Error::InvalidDimension(d as i64));
    }
    let eval = |x: f64| lemma_function_dd(id, d, x).expect("argument in range");
    let roots = isolate_roots(eval, SCAN_NODES, BISECTION_STEPS);

    let n = SCAN_NODES;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut all_positive = true;
    for i in 1..=n {
        let v = eval(i as f64 / (n + 1) as f64).to_f64();
        lo = lo.min(v);
        hi = hi.max(v);
        all_positive &= v > 0.0;
    }

    let derivative_id = match id {
        LemmaFunction::G => Some(LemmaFunction::H),
        LemmaFunction::K => Some(LemmaFunction::SmallM),
        _ => None,
    };
    let critical_points = match (id, derivative_id) {
        (_, Some(did)) => isolate_roots(
            |x| lemma_function_dd(did, d, x).expect("argument in range"),
            SCAN_NODES,
            BISECTION_STEPS,
        ),
        (LemmaFunction::CapitalM, None) => isolate_roots(
            |x| DD::new(lemma_derivative(LemmaFunction::CapitalM, d, x).expect("argument in range")),
            SCAN_NODES,
            BISECTION_STEPS,
        ),
        _ => Vec::new(),
    };

    let mut signs = Vec::with_capacity(roots.len() + 1);
    let mut left = 0.0;
    for r in roots.iter().chain(std::iter::once(&Root {
        lo: 1.0,
        hi: 1.0,
        x: 1.0,
    })) {
        let mid = 0.5 * (left + r.lo);
        let v = eval(mid);
        signs.push(if v.hi > 0.0 {
            1
        } else if v.hi < 0.0 {
            -1
        } else {
            0
        });
        left = r.hi;
    }

    let (expected, ok) = match id {
        LemmaFunction::F => ("f > 0 on (0,1)", all_positive && roots.is_empty()),
        LemmaFunction::G => (
            "g > 0 on (0,1) with a single interior maximum",
            all_positive && roots.is_empty() && critical_points.len() == 1,
        ),
        LemmaFunction::H => ("h has exactly one interior root", roots.len() == 1),
        LemmaFunction::K => (
            "k > 0 on (0,1) with a single interior maximum",
            all_positive && roots.is_empty() && critical_points.len() == 1,
        ),
        LemmaFunction::SmallM => ("m has exactly one interior root", roots.len() == 1),
        LemmaFunction::CapitalM => (
            "M has exactly one interior root and two critical points",
            roots.len() == 1 && critical_points.len() == 2,
        ),
    };

    Ok(LemmaFunctionReport {
        d,
        function: id,
        value_at_0: lemma_function(id, d, 0.0)?,
        value_at_1: lemma_function(id, d, 1.0)?,
        roots,
        critical_points,
        signs,
        interior_min: lo,
        interior_max: hi,
        scan_nodes: n,
        expected: expected.to_string(),
        structure_ok: ok,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedMinimum {
    pub kind: ThresholdKind,
    pub d: u32,
    pub min_value: f64,
    pub argmin: f64,
    pub bound: f64,
    pub nodes: usize,
    pub limit_at_0: f64,
    pub limit_at_1: f64,
    pub pass: bool,
}

pub const CERTIFY_NODES: usize = 10_000;
pub const CERTIFY_TOL: f64 = 1e-9;

/// Uniform grid of `n` nodes on `[1e-4, 1 − 1e-4]`.
pub fn certification_grid(n: usize) -> Vec<f64> {
    let (a, b) = (1e-4, 1.0 - 1e-4);
    (0..n)
        .map(|i| {
            if n == 1 {
                a
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

pub fn certified_minimum(kind: ThresholdKind, d: u32) -> Result<CertifiedMinimum> {
    certified_minimum_on(kind, d, CERTIFY_NODES)
}

pub fn certified_minimum_on(kind: ThresholdKind, d: u32, nodes: usize) -> Result<CertifiedMinimum> {
    kind.check_dim(d)?;
    let mut min_value = f64::INFINITY;
    let mut argmin = f64::NAN;
    for t in certification_grid(nodes) {
        let v = threshold(kind, d, t)?.value;
        if v < min_value {
            min_value = v;
            argmin = t;
        }
    }
    let limit_at_0 = threshold(kind, d, 0.0)?.value;
    let limit_at_1 = threshold(kind, d, 1.0)?.value;
    let bound = kind.bound();
    let pass = min_value >= bound - CERTIFY_TOL && limit_at_0 >= bound - CERTIFY_TOL;
    Ok(CertifiedMinimum {
        kind,
        d,
        min_value,
        argmin,
        bound,
        nodes,
        limit_at_0,
        limit_at_1,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub d: u32,
    pub kind: ThresholdKind,
    pub samples: Vec<(f64, f64)>,
}

impl ThresholdCurve {
    pub fn sample(kind: ThresholdKind, d: u32, grid: &[f64]) -> Result<Self> {
        let samples = grid
            .iter()
            .map(|&t| Ok((t, threshold(kind, d, t)?.value)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { d, kind, samples })
    }

    pub fn min_margin(&self) -> f64 {
        let b = self.kind.bound();
        self.samples.iter().map(|&(_, v)| v - b).fold(f64::INFINITY, f64::min)
    }
}

/// CSV with columns `kind,d,t,value,bound,margin`.
pub fn write_curves_csv<W: Write>(curves: &[ThresholdCurve], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(["kind", "d", "t", "value", "bound", "margin"])
        .map_err(to_err)?;
    for c in curves {
        let b = c.kind.bound();
        for &(t, v) in &c.samples {
            w.write_record([
                c.kind.name().to_string(),
                c.d.to_string(),
                format!("{t:.17e}"),
                format!("{v:.17e}"),
                format!("{b}"),
                format!("{:.17e}", v - b),
            ])
            .map_err(to_err)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub d: u32,
    pub constraint: Constraint,
    /// Comparison-ball radius R.
    pub radius: f64,
    /// `τ_D(B_R) − τ_DN(A)`
    pub lhs: f64,
    /// `c R (|B_R|²/|∂B_R| − |Ω|²/|∂Ω|)`
    pub rhs: f64,
    pub margin: f64,
    /// `rhs / (c · lhs)`, the admissible bound on `−αR`.
    pub gap_ratio: f64,
    pub pass: bool,
}

/// Both sides of the ball-versus-shell gap estimate, written so that the
/// common `t^d` factor never cancels numerically.
pub fn quantitative_gap(d: u32, shell: &ShellGeometry, constraint: Constraint) -> Result<GapReport> {
    if d != shell.dim {
        return Err(Error::InvalidInput(format!(
            "dimension {d} does not match shell dimension {}",
            shell.dim
        )));
    }
    if d < 2 {
        return Err(Error::InvalidDimension(d as i64));
    }
    if shell.inner <= 0.0 {
        return Err(Error::DegenerateShell {
            r1: shell.inner,
            r2: shell.outer,
        });
    }
    let df = d as f64;
    let dc = dimensional_constants(d);
    let (s, v) = (dc.sphere_area, dc.ball_volume);
    let r2 = shell.outer;
    let t = shell.ratio();
    let di = d as i32;
    let td = t.powi(di);
    let log_w = (-td).ln_1p();
    let r2p = r2.powi(di + 2);

    // τ_D(B_{R2}) − τ_DN, all terms carrying t^d
    let ball_minus_shell = if d == 2 {
        // (π/8) R2⁴ t² (4 − 3t² + 4t² log t)
        let t2 = t * t;
        std::f64::consts::PI / 8.0 * r2p * t2 * (4.0 - 3.0 * t2 + 4.0 * t2 * t.ln())
    } else {
        s * r2p * td * (1.0 / (df * df) - t * t / (df * df - 4.0) + td / (df * df * (df - 2.0)))
    };

    let (radius, c, lhs, rhs) = match constraint {
        Constraint::Perimeter => {
            // 1 − w² = t^d (2 − t^d)
            let rhs = 0.5 * r2 * v * r2.powi(di + 1) / df * td * (2.0 - td);
            (r2, 0.5, ball_minus_shell, rhs)
        }
        Constraint::Volume => {
            let radius = r2 * (log_w / df).exp();
            // τ_D(B_R) = τ_D(B_{R2}) w^{(d+2)/d}
            let shrink = -((df + 2.0) / df * log_w).exp_m1();
            let lhs = ball_minus_shell - s * r2p / (df * df * (df + 2.0)) * shrink;
            let rhs = v / df * r2p * ((2.0 + 1.0 / df) * log_w).exp() * (-(df - 1.0) / df * log_w).exp_m1();
            (radius, 1.0, lhs, rhs)
        }
    };
    let margin = rhs - lhs;
    Ok(GapReport {
        d,
        constraint,
        radius,
        lhs,
        rhs,
        margin,
        gap_ratio: rhs / (c * lhs),
        pass: lhs > 0.0 && rhs > 0.0 && margin >= -1e-10 * rhs,
    })
}

/// Geometry handed to the applicability check: either a measured 2-D domain
/// or radial data in any dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateInput {
    pub dim: u32,
    /// `|Ω|`
    pub volume: f64,
    /// `|∂Ω|`
    pub surface: f64,
    /// Measured or bounded `σ₁(Ω)`, if available.
    pub sigma1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    /// Every clause of the sufficient condition holds.
    Holds,
    /// The threshold clause holds; the σ₁ clause awaits a measurement.
    Deferred,
    /// Some clause fails.
    NotCertified,
    /// α ≤ −(d+2)/R: outside every proven regime.
    Refused,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub dim: u32,
    pub alpha: f64,
    pub constraint: Constraint,
    pub kind: Option<ThresholdKind>,
    pub shell_t: f64,
    pub radius: f64,
    pub minus_alpha_r: f64,
    /// Admissible bound on `−αR`.
    pub threshold: f64,
    pub threshold_clause: bool,
    /// `α ≥ −2/R` (perimeter) or `α ≥ −1/R` (volume, d ≥ 3).
    pub fallback_clause: Option<bool>,
    pub sigma_clause: Option<bool>,
    pub decision: Decision,
}

/// Matched shell radii `(R1, R2)` for a domain with the given volume and
/// surface area.
pub fn matched_radii(d: u32, volume: f64, surface: f64) -> Result<(f64, f64)> {
    if d < 2 {
        return Err(Error::InvalidDimension(d as i64));
    }
    if !(volume > 0.0 && surface > 0.0) {
        return Err(Error::InvalidInput("volume and surface must be positive".into()));
    }
    let dc = dimensional_constants(d);
    let r2 = (surface / dc.sphere_area).powf(1.0 / (d as f64 - 1.0));
    let ball = dc.ball_volume * r2.powi(d as i32);
    let deficit = ball - volume;
    if deficit < -1e-12 * ball {
        return Err(Error::Geometry(format!(
            "isoperimetric deficit is negative ({deficit:e}); volume {volume} exceeds the ball of the same surface"
        )));
    }
    let r1 = (deficit.max(0.0) / dc.ball_volume).powf(1.0 / d as f64);
    Ok((r1, r2))
}

/// Evaluates the chain of sufficient conditions for the ball to minimise
/// the Robin torsion at `alpha < 0` under the given constraint.
pub fn applicability_certificate(input: &CertificateInput, alpha: f64, constraint: Constraint) -> Result<Certificate> {
    if !(alpha < 0.0) {
        return Err(Error::InvalidInput(format!(
            "alpha = {alpha} is outside the negative regime"
        )));
    }
    let d = input.dim;
    let (r1, r2) = matched_radii(d, input.volume, input.surface)?;
    let t = r1 / r2;
    let dc = dimensional_constants(d);
    let radius = match constraint {
        Constraint::Perimeter => r2,
        Constraint::Volume => (input.volume / dc.ball_volume).powf(1.0 / d as f64),
    };
    let kind = ThresholdKind::for_dim(d, constraint);
    let threshold_value = match kind {
        Some(k) => threshold_on_alpha_r(k, d, t)?,
        // planar area constraint: the gap ratio itself
        None if t == 0.0 => 1.0,
        None => {
            let shell = ShellGeometry::new(d, r1, r2)?;
            quantitative_gap(d, &shell, constraint)?.gap_ratio
        }
    };
    let minus_alpha_r = -alpha * radius;
    let threshold_clause = minus_alpha_r <= threshold_value;
    let fallback_clause = match (constraint, kind) {
        (Constraint::Perimeter, _) => Some(alpha >= -2.0 / radius),
        (Constraint::Volume, Some(_)) => Some(alpha >= -1.0 / radius),
        (Constraint::Volume, None) => None,
    };
    let sigma_clause = input.sigma1.map(|s| alpha > -s);
    let refused = alpha <= -(d as f64 + 2.0) / radius;
    let decision = if refused {
        Decision::Refused
    } else if !(threshold_clause || fallback_clause == Some(true)) || sigma_clause == Some(false) {
        Decision::NotCertified
    } else if sigma_clause.is_none() {
        Decision::Deferred
    } else {
        Decision::Holds
    };
    Ok(Certificate {
        dim: d,
        alpha,
        constraint,
        kind,
        shell_t: t,
        radius,
        minus_alpha_r,
        threshold: threshold_value,
        threshold_clause,
        fallback_clause,
        sigma_clause,
        decision,
    })
}

//! Gauss–Legendre rules and adaptive composite integration.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1], found by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// The 15-point panel rule used by the adaptive integrator.
pub fn gl15() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(15))
}

/// 32-point rule for smooth one-shot integrals.
pub fn gl32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

const MAX_DEPTH: u32 = 40;

/// Adaptive composite Gauss–Legendre with recursive bisection. A panel is
/// accepted when the 15-point value agrees with the sum over its halves to
/// within the share of `abs_tol` proportional to its width. Panels still
/// unresolved at the depth cap are accepted if their summed error stays
/// below `abs_tol`, which covers integrable endpoint singularities.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let rule = gl15();
    let whole = rule.integrate(a, b, f);
    let tol = abs_tol.max(f64::MIN_POSITIVE);
    let mut spill = Spill::default();
    let v = recurse(f, rule, a, b, whole, tol, b - a, 0, &mut spill);
    if spill.error > tol {
        let (pa, pb) = spill.worst;
        return Err(Error::Quadrature {
            a: pa,
            b: pb,
            estimate: v,
            error: spill.error,
        });
    }
    Ok(v)
}

#[derive(Default)]
struct Spill {
    error: f64,
    worst: (f64, f64),
    worst_err: f64,
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    total_width: f64,
    depth: u32,
    spill: &mut Spill,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, f);
    let right = rule.integrate(m, b, f);
    let err = (left + right - whole).abs();
    let share = tol * (b - a) / total_width;
    if err <= share || (b - a) <= 1e-15 * total_width.max(a.abs().max(b.abs())) {
        return left + right;
    }
    if depth >= MAX_DEPTH {
        spill.error += err;
        if err >= spill.worst_err {
            spill.worst_err = err;
            spill.worst = (a, b);
        }
        return left + right;
    }
    recurse(f, rule, a, m, left, tol, total_width, depth + 1, spill)
        + recurse(f, rule, m, b, right, tol, total_width, depth + 1, spill)
}

/// Integrates across a sorted list of breakpoints, one adaptive run per
/// panel, splitting the tolerance by width.
pub fn adaptive_piecewise<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], abs_tol: f64) -> Result<f64> {
    if breaks.len() < 2 {
        return Ok(0.0);
    }
    let total = breaks[breaks.len() - 1] - breaks[0];
    if total <= 0.0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b > a {
            sum += adaptive(f, a, b, abs_tol * (b - a) / total)?;
        }
    }
    Ok(sum)
}

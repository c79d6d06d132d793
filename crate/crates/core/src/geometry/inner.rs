//! Inner parallel bodies `Ω_t = {x ∈ Ω : dist(x, ∂Ω) > t}` of convex
//! polygons as intersections of inset edge half-planes.

use serde::{Deserialize, Serialize};

use super::{ConvexPolygon, Point};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_piecewise;

/// Outward unit normals and offsets: the polygon is `{x : n·x ≤ c}`.
fn half_planes(poly: &ConvexPolygon) -> Vec<(Point, f64)> {
    poly.edges()
        .map(|(a, b)| {
            let e = b - a;
            let len = e.norm();
            let n = Point::new(e.y / len, -e.x / len);
            (n, n.dot(a))
        })
        .collect()
}

/// Sutherland–Hodgman clip of a convex polygon by `n·x ≤ c`.
fn clip(poly: &[Point], n: Point, c: f64) -> Vec<Point> {
    let m = poly.len();
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..m {
        let p = poly[i];
        let q = poly[(i + 1) % m];
        let fp = n.dot(p) - c;
        let fq = n.dot(q) - c;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let s = fp / (fp - fq);
            out.push(p + (q - p) * s);
        }
    }
    out
}

fn dedup(mut v: Vec<Point>, tol: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(v.len());
    for p in v.drain(..) {
        if out.last().is_none_or(|q| q.dist(p) > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= tol {
        out.pop();
    }
    out
}

struct Eroder {
    base: Vec<Point>,
    planes: Vec<(Point, f64)>,
    tol: f64,
}

impl Eroder {
    fn new(poly: &ConvexPolygon) -> Self {
        Self {
            base: poly.vertices().to_vec(),
            planes: half_planes(poly),
            tol: 1e-12 * poly.diameter(),
        }
    }

    fn raw(&self, t: f64) -> Vec<Point> {
        let mut cur = self.base.clone();
        for &(n, c) in &self.planes {
            cur = clip(&cur, n, c - t);
            if cur.is_empty() {
                break;
            }
        }
        cur
    }

    fn body(&self, t: f64) -> Option<Vec<Point>> {
        if t == 0.0 {
            return Some(self.base.clone());
        }
        let v = dedup(self.raw(t), self.tol);
        if v.len() < 3 {
            return None;
        }
        let area = 0.5 * (0..v.len()).map(|i| v[i].cross(v[(i + 1) % v.len()])).sum::<f64>();
        (area > 0.0).then_some(v)
    }

    fn vertex_count(&self, t: f64) -> usize {
        self.body(t).map_or(0, |v| v.len())
    }
}

/// `Ω_t`, or `None` once `t` reaches the inradius.
pub fn inner_parallel_body(poly: &ConvexPolygon, t: f64) -> Result<Option<ConvexPolygon>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("offset must be nonnegative, got {t}")));
    }
    Ok(Eroder::new(poly).body(t).map(ConvexPolygon::from_raw))
}

/// Largest `t` with `Ω_t` nonempty, by bisection on the erosion.
pub fn inradius(poly: &ConvexPolygon) -> f64 {
    let er = Eroder::new(poly);
    let diam = poly.diameter();
    let mut lo = 0.0;
    let mut hi = (poly.area() / std::f64::consts::PI).sqrt() * (1.0 + 1e-9);
    let mut it = 0;
    while hi - lo > 1e-15 * diam && it < 200 {
        let mid = 0.5 * (lo + hi);
        if er.raw(mid).is_empty() {
            hi = mid;
        } else {
            lo = mid;
        }
        it += 1;
    }
    0.5 * (lo + hi)
}

/// Offsets in `(0, r_Ω)` where an edge of `Ω_t` vanishes and `|∂Ω_t|`
/// has a kink: vertex-count changes between samples, refined by bisection.
pub fn perimeter_events(poly: &ConvexPolygon, r: f64) -> Vec<f64> {
    let er = Eroder::new(poly);
    let diam = poly.diameter();
    let samples = 64;
    let mut top = r * (1.0 - 1e-9);
    if er.vertex_count(top) == 0 {
        // the last sliver fell below the dedup tolerance; sampling stops
        // where the body still exists so the collapse is not an event
        let (mut a, mut b) = (0.0, top);
        while b - a > 1e-15 * diam {
            let m = 0.5 * (a + b);
            if er.vertex_count(m) > 0 {
                a = m;
            } else {
                b = m;
            }
        }
        top = a;
    }
    let ts: Vec<f64> = (0..=samples).map(|i| top * i as f64 / samples as f64).collect();
    let counts: Vec<usize> = ts.iter().map(|&t| er.vertex_count(t)).collect();
    let mut events = Vec::new();
    for i in 0..samples {
        find_events(&er, ts[i], ts[i + 1], counts[i], counts[i + 1], diam, &mut events);
    }
    events.sort_by(f64::total_cmp);
    events
}

fn find_events(er: &Eroder, lo: f64, hi: f64, nlo: usize, nhi: usize, diam: f64, out: &mut Vec<f64>) {
    if nlo == nhi {
        return;
    }
    if hi - lo <= 1e-14 * diam {
        out.push(0.5 * (lo + hi));
        return;
    }
    if nlo == nhi + 1 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            if b - a <= 1e-15 * diam {
                break;
            }
            let m = 0.5 * (a + b);
            if er.vertex_count(m) == nlo {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
        return;
    }
    let m = 0.5 * (lo + hi);
    let nm = er.vertex_count(m);
    find_events(er, lo, m, nlo, nm, diam, out);
    find_events(er, m, hi, nm, nhi, diam, out);
}

fn perimeter_of(v: &[Point]) -> f64 {
    (0..v.len()).map(|i| v[i].dist(v[(i + 1) % v.len()])).sum()
}

fn area_of(v: &[Point]) -> f64 {
    0.5 * (0..v.len()).map(|i| v[i].cross(v[(i + 1) % v.len()])).sum::<f64>()
}

/// `2 Σ cot(θᵢ/2)` over the vertices of a convex polygon.
fn cot_sum(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = v[(i + n - 1) % n];
            let b = v[i];
            let c = v[(i + 1) % n];
            let (e0, e1) = (b - a, c - b);
            // exterior angle φ = π − θ, cot(θ/2) = tan(φ/2)
            let phi = e0.cross(e1).atan2(e0.dot(e1));
            2.0 * (0.5 * phi).tan()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub t: f64,
    /// `|∂Ω_t|`
    pub perimeter: f64,
    /// `|Ω_t|`
    pub area: f64,
    /// `−d/dt |∂Ω_t| = 2 Σ cot(θᵢ/2)`; zero once empty.
    pub neg_perimeter_slope: f64,
    pub body: Option<ConvexPolygon>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerBodyProfile {
    pub inradius: f64,
    /// Kinks of `|∂Ω_t|` in `(0, r_Ω)`.
    pub events: Vec<f64>,
    pub samples: Vec<ProfileSample>,
    /// Breakpoints `0, events…, r_Ω` with `|∂Ω_t|` at each; the perimeter is
    /// linear between them.
    pub knots: Vec<(f64, f64)>,
}

impl InnerBodyProfile {
    /// `|∂Ω_t|` by interpolation between knots (exact for polygons).
    pub fn perimeter_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.knots[0].1;
        }
        if t >= self.inradius {
            return 0.0;
        }
        let i = self
            .knots
            .partition_point(|&(s, _)| s <= t)
            .clamp(1, self.knots.len() - 1);
        let (t0, p0) = self.knots[i - 1];
        let (t1, p1) = self.knots[i];
        p0 + (p1 - p0) * (t - t0) / (t1 - t0)
    }

    /// `0, events…, r_Ω`
    pub fn breakpoints(&self) -> Vec<f64> {
        self.knots.iter().map(|&(t, _)| t).collect()
    }

    pub fn min_neg_slope(&self) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.body.is_some())
            .map(|s| s.neg_perimeter_slope)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest increase of perimeter or area between consecutive samples.
    pub fn max_uptick(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (w[1].perimeter - w[0].perimeter).max(w[1].area - w[0].area))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Perimeter, area and perimeter slope of `Ω_t` at each grid node.
pub fn level_profiles(poly: &ConvexPolygon, grid: &[f64]) -> Result<InnerBodyProfile> {
    let r = inradius(poly);
    let slack = 1e-12 * poly.diameter();
    if let Some(&bad) = grid.iter().find(|&&t| !(t >= 0.0 && t <= r + slack)) {
        return Err(Error::OutOfRange {
            value: bad,
            lo: 0.0,
            hi: r,
        });
    }
    let er = Eroder::new(poly);
    let events = perimeter_events(poly, r);
    let samples = grid
        .iter()
        .map(|&t| match er.body(t) {
            Some(v) => ProfileSample {
                t,
                perimeter: perimeter_of(&v),
                area: area_of(&v),
                neg_perimeter_slope: cot_sum(&v),
                body: Some(ConvexPolygon::from_raw(v)),
            },
            None => ProfileSample {
                t,
                perimeter: 0.0,
                area: 0.0,
                neg_perimeter_slope: 0.0,
                body: None,
            },
        })
        .collect();
    let mut knots = vec![(0.0, poly.perimeter())];
    for &e in &events {
        knots.push((e, er.body(e).map_or(0.0, |v| perimeter_of(&v))));
    }
    // limit at r_Ω from the last linear piece, evaluated just inside
    let (t_last, p_last) = *knots.last().expect("nonempty");
    let near = t_last + (r - t_last) * (1.0 - 1e-6);
    let p_near = er.body(near).map_or(0.0, |v| perimeter_of(&v));
    let slope = (p_near - p_last) / (near - t_last);
    knots.push((r, (p_last + slope * (r - t_last)).max(0.0)));
    Ok(InnerBodyProfile {
        inradius: r,
        events,
        samples,
        knots,
    })
}

/// `∫₀^{r_Ω} |∂Ω_t| dt` by adaptive quadrature with panels split at the
/// events, evaluating the perimeter of the eroded polygon directly.
pub fn coarea_area(poly: &ConvexPolygon, abs_tol: f64) -> Result<f64> {
    let r = inradius(poly);
    let er = Eroder::new(poly);
    let mut breaks = vec![0.0];
    breaks.extend(perimeter_events(poly, r));
    breaks.push(r);
    adaptive_piecewise(&|t| er.body(t).map_or(0.0, |v| perimeter_of(&v)), &breaks, abs_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn kite() -> ConvexPolygon {
        ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.2),
            Point::new(3.4, 1.0),
            Point::new(1.0, 2.5),
            Point::new(-0.5, 1.2),
        ])
        .unwrap()
    }

    #[test]
    fn zero_offset_is_identity() {
        let p = kite();
        let q = inner_parallel_body(&p, 0.0).unwrap().unwrap();
        for (a, b) in p.vertices().iter().zip(q.vertices()) {
            assert!(a.dist(*b) < 1e-12);
        }
    }

    #[test]
    fn square_offset() {
        let q = inner_parallel_body(&ConvexPolygon::unit_square(), 0.25)
            .unwrap()
            .unwrap();
        assert!((q.perimeter() - 2.0).abs() < 1e-14);
        assert!((q.area() - 0.25).abs() < 1e-14);
        assert!(inner_parallel_body(&ConvexPolygon::unit_square(), 0.505)
            .unwrap()
            .is_none());
        assert!(inner_parallel_body(&ConvexPolygon::unit_square(), -0.1).is_err());
    }

    #[test]
    fn beyond_inradius_is_empty() {
        let p = kite();
        let r = inradius(&p);
        assert!(inner_parallel_body(&p, 1.01 * r).unwrap().is_none());
        assert!(inner_parallel_body(&p, 0.99 * r).unwrap().is_some());
    }

    #[test]
    fn rectangle_inradius_and_events() {
        let p = ConvexPolygon::rectangle(3.0, 1.0).unwrap();
        assert!((inradius(&p) - 0.5).abs() < 1e-14);
        assert!(perimeter_events(&p, 0.5).is_empty());
    }

    #[test]
    fn square_slope_is_eight() {
        let p = ConvexPolygon::unit_square();
        let prof = level_profiles(&p, &[0.0, 0.1, 0.3, 0.49]).unwrap();
        for s in &prof.samples {
            assert!((s.neg_perimeter_slope - 8.0).abs() < 1e-12);
        }
        assert!(level_profiles(&p, &[0.6]).is_err());
    }

    #[test]
    fn near_disk_slope_is_two_pi() {
        let p = ConvexPolygon::regular(256, 1.0).unwrap();
        let r = inradius(&p);
        let grid: Vec<f64> = (0..20).map(|i| r * i as f64 / 20.0).collect();
        let prof = level_profiles(&p, &grid).unwrap();
        for s in &prof.samples {
            assert!(s.neg_perimeter_slope >= 2.0 * PI);
            assert!((s.neg_perimeter_slope - 2.0 * PI).abs() < 1e-3);
        }
    }

    #[test]
    fn events_found_for_irregular_polygon() {
        let p = kite();
        let r = inradius(&p);
        let ev = perimeter_events(&p, r);
        assert!(!ev.is_empty());
        let prof = level_profiles(&p, &[]).unwrap();
        // slope from the cot formula matches the knot interpolation between events
        let er = Eroder::new(&p);
        let bps = prof.breakpoints();
        for w in bps.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let knot_slope = -(prof.perimeter_at(w[1] - 1e-9 * (w[1] - w[0])) - prof.perimeter_at(w[0]))
                / ((w[1] - w[0]) * (1.0 - 1e-9));
            let Some(body) = er.body(mid) else {
                // only a sliver thinner than the dedup tolerance may vanish
                assert!(w[1] - w[0] < 1e-8 * r, "{bps:?}");
                continue;
            };
            let cot = cot_sum(&body);
            assert!((knot_slope - cot).abs() < 1e-7 * cot, "{knot_slope} vs {cot}");
        }
        // interpolation agrees with direct erosion
        for i in 1..50 {
            let t = r * i as f64 / 50.0;
            let direct = er.body(t).map_or(0.0, |v| perimeter_of(&v));
            assert!((prof.perimeter_at(t) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn coarea_closure() {
        for p in [
            kite(),
            ConvexPolygon::unit_square(),
            ConvexPolygon::regular(7, 1.3).unwrap(),
        ] {
            let a = coarea_area(&p, 1e-13).unwrap();
            assert!((a - p.area()).abs() <= 1e-9 * p.area(), "{a} vs {}", p.area());
        }
    }
}

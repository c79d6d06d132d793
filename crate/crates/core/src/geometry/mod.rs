//! Convex polygons: validation, summaries, inner parallel bodies and the
//! planar Steiner / isoperimetric checks.

mod checks;
mod inner;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checks::{inequality_checks, steiner_outer_check, InequalityReport, SteinerCheck};
pub use inner::{
    coarea_area, inner_parallel_body, inradius, level_profiles, perimeter_events, InnerBodyProfile, ProfileSample,
};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Relative tolerance on turning cross products, scaled by diameter².
pub const CONVEXITY_TOL: f64 = 1e-12;

/// Strictly convex, counterclockwise polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonFile", into = "PolygonFile")]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct PolygonFile {
    vertices: Vec<Point>,
}

impl TryFrom<PolygonFile> for ConvexPolygon {
    type Error = Error;
    fn try_from(f: PolygonFile) -> Result<Self> {
        ConvexPolygon::new(f.vertices)
    }
}

impl From<ConvexPolygon> for PolygonFile {
    fn from(p: ConvexPolygon) -> Self {
        PolygonFile { vertices: p.vertices }
    }
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon {
                vertex: n,
                reason: format!("need at least 3 vertices, got {n}"),
            });
        }
        for (i, p) in vertices.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidPolygon {
                    vertex: i,
                    reason: "non-finite coordinate".into(),
                });
            }
        }
        let diam = diameter(&vertices);
        if !(diam > 0.0) {
            return Err(Error::InvalidPolygon {
                vertex: 0,
                reason: "all vertices coincide".into(),
            });
        }
        for i in 0..n {
            if vertices[i].dist(vertices[(i + 1) % n]) <= 1e-14 * diam {
                return Err(Error::InvalidPolygon {
                    vertex: (i + 1) % n,
                    reason: "repeated point".into(),
                });
            }
        }
        let tol = CONVEXITY_TOL * diam * diam;
        let mut turning = 0.0;
        for i in 0..n {
            let a = vertices[(i + n - 1) % n];
            let b = vertices[i];
            let c = vertices[(i + 1) % n];
            let (e0, e1) = (b - a, c - b);
            let cr = e0.cross(e1);
            if cr <= tol {
                let reason = if cr < -tol {
                    "reflex or clockwise turn"
                } else {
                    "collinear neighbours (turn below tolerance)"
                };
                return Err(Error::InvalidPolygon {
                    vertex: i,
                    reason: reason.into(),
                });
            }
            turning += cr.atan2(e0.dot(e1));
        }
        if (turning - 2.0 * PI).abs() > 1e-9 {
            return Err(Error::InvalidPolygon {
                vertex: 0,
                reason: format!("boundary winds {:.3} times", turning / (2.0 * PI)),
            });
        }
        Ok(Self { vertices })
    }

    /// Builds without validation; used for inset polygons, which are convex
    /// by construction but may carry nearly collinear vertices.
    pub(crate) fn from_raw(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn regular(n: usize, circumradius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("regular polygon needs n >= 3, got {n}")));
        }
        let v = (0..n)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / n as f64;
                Point::new(circumradius * th.cos(), circumradius * th.sin())
            })
            .collect();
        Self::new(v)
    }

    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        Self::new(vec![
            Point::new(0.0, 0.0),
            Point::new(width, 0.0),
            Point::new(width, height),
            Point::new(0.0, height),
        ])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(1.0, 1.0).expect("unit square is valid")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        let a = self.area();
        let (mut cx, mut cy) = (0.0, 0.0);
        for (p, q) in self.edges() {
            let c = p.cross(q);
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        Point::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    /// Interior angle at each vertex, in (0, π).
    pub fn interior_angles(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[(i + n - 1) % n];
                let b = self.vertices[i];
                let c = self.vertices[(i + 1) % n];
                let (e0, e1) = (b - a, c - b);
                PI - e0.cross(e1).atan2(e0.dot(e1))
            })
            .collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_raw(self.vertices.iter().map(|&p| p * s).collect())
    }

    pub fn translated(&self, by: Point) -> Self {
        Self::from_raw(self.vertices.iter().map(|&p| p + by).collect())
    }

    /// Whether `p` lies in the closed polygon, up to `tol` outside.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.edges().all(|(a, b)| {
            let e = b - a;
            e.cross(p - a) >= -tol * e.norm()
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            path: "<string>".into(),
            message: e.to_string(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("polygon serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.into(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }
}

fn diameter(v: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            d = d.max(v[i].dist(v[j]));
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricSummary {
    pub area: f64,
    pub perimeter: f64,
    pub inradius: f64,
    /// `(W₀, W₁, W₂) = (|Ω|, |∂Ω|/2, π)`
    pub quermass: [f64; 3],
}

pub fn summarize(poly: &ConvexPolygon) -> GeometricSummary {
    let area = poly.area();
    let perimeter = poly.perimeter();
    GeometricSummary {
        area,
        perimeter,
        inradius: inradius(poly),
        quermass: [area, 0.5 * perimeter, PI],
    }
}

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Family, Normalization};
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point};

pub const STRETCH_ASPECTS: [f64; 4] = [1.5, 2.0, 3.0, 5.0];

const MIN_ELLIPSE_POINTS: usize = 12;
const MAX_RETRIES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    /// `family-index`, zero padded so ids sort in generation order.
    pub id: String,
    pub family: Family,
    pub polygon: ConvexPolygon,
}

pub fn generate_domains(config: &ExperimentConfig) -> Result<Vec<Domain>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.count)
        .map(|i| {
            let raw = match config.family {
                Family::RegularNgon => ConvexPolygon::regular(regular_sides(i, config.count), 1.0)?,
                Family::RandomConvex => random_convex(&mut rng)?,
                Family::StretchedHexagon => stretched_hexagon(i, &mut rng)?,
            };
            Ok(Domain {
                id: format!("{}-{i:03}", config.family),
                family: config.family,
                polygon: normalize(&raw, config.normalization)?,
            })
        })
        .collect()
}

/// Evenly spread over 3..=64; a single domain is the 64-gon.
fn regular_sides(i: usize, count: usize) -> usize {
    if count == 1 {
        return 64;
    }
    3 + ((61 * i) as f64 / (count - 1) as f64).round() as usize
}

fn stretched_hexagon(i: usize, rng: &mut ChaCha8Rng) -> Result<ConvexPolygon> {
    let aspect = STRETCH_ASPECTS[i % STRETCH_ASPECTS.len()];
    // past the first cycle, vary the orientation so meshes differ
    let turn = if i < STRETCH_ASPECTS.len() {
        0.0
    } else {
        rng.random_range(0.0..PI)
    };
    let (s, c) = turn.sin_cos();
    let v = (0..6)
        .map(|k| {
            let th = PI / 3.0 * k as f64;
            let (x, y) = (aspect * th.cos(), th.sin());
            Point::new(c * x - s * y, s * x + c * y)
        })
        .collect();
    ConvexPolygon::new(v)
}

fn random_convex(rng: &mut ChaCha8Rng) -> Result<ConvexPolygon> {
    for _ in 0..MAX_RETRIES {
        let m = rng.random_range(MIN_ELLIPSE_POINTS..=2 * MIN_ELLIPSE_POINTS);
        let b = rng.random_range(0.35..1.0);
        let turn = rng.random_range(0.0..PI);
        let (s, c) = f64::sin_cos(turn);
        let pts: Vec<Point> = (0..m)
            .map(|k| {
                let th = 2.0 * PI * (k as f64 + rng.random_range(-0.45..0.45)) / m as f64;
                let r = 1.0 + rng.random_range(-0.08..0.08);
                let (x, y) = (r * th.cos(), r * b * th.sin());
                Point::new(c * x - s * y, s * x + c * y)
            })
            .collect();
        let hull = convex_hull(pts);
        if hull.len() >= 3 {
            if let Ok(p) = ConvexPolygon::new(hull) {
                return Ok(p);
            }
        }
    }
    Err(Error::Geometry(format!("no valid hull after {MAX_RETRIES} samples")))
}

/// Andrew's monotone chain, counterclockwise, collinear points dropped.
fn convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Rescaled about the centroid so the normalized quantity equals `c`.
fn normalize(poly: &ConvexPolygon, norm: Normalization) -> Result<ConvexPolygon> {
    let c = norm.value();
    let s = match norm {
        Normalization::Perimeter(c) => c / poly.perimeter(),
        Normalization::Area(c) => (c / poly.area()).sqrt(),
    };
    let centred = poly.translated(Point::new(-poly.centroid().x, -poly.centroid().y));
    let out = centred.scaled(s);
    let got = match norm {
        Normalization::Perimeter(_) => out.perimeter(),
        Normalization::Area(_) => out.area(),
    };
    if (got - c).abs() > 1e-12 * c {
        return Err(Error::Geometry(format!("normalization to {norm} reached {got}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(family: Family, count: usize, seed: u64, norm: Normalization) -> ExperimentConfig {
        ExperimentConfig::new(family, count, seed, norm)
    }

    #[test]
    fn square_of_side_quarter_pi() {
        // n = 4 is the second of 62 evenly spread regular polygons
        let d = generate_domains(&config(Family::RegularNgon, 62, 0, Normalization::Perimeter(2.0 * PI))).unwrap();
        let sq = &d[1].polygon;
        assert_eq!(sq.len(), 4);
        for (a, b) in sq.edges() {
            assert!((a.dist(b) - PI / 2.0).abs() < 1e-14);
        }
        assert_eq!(d[0].polygon.len(), 3);
        assert_eq!(d[61].polygon.len(), 64);
    }

    #[test]
    fn seeded_determinism() {
        let c = config(Family::RandomConvex, 10, 42, Normalization::Area(PI));
        let a = generate_domains(&c).unwrap();
        let b = generate_domains(&c).unwrap();
        assert_eq!(a, b);
        let other = generate_domains(&config(Family::RandomConvex, 10, 43, Normalization::Area(PI))).unwrap();
        assert_ne!(a[0].polygon, other[0].polygon);
    }

    #[test]
    fn exact_normalization() {
        for family in [Family::RegularNgon, Family::RandomConvex, Family::StretchedHexagon] {
            for d in generate_domains(&config(family, 9, 5, Normalization::Area(PI))).unwrap() {
                assert!((d.polygon.area() - PI).abs() <= 1e-12 * PI, "{}", d.id);
            }
            for d in generate_domains(&config(family, 9, 5, Normalization::Perimeter(2.0 * PI))).unwrap() {
                assert!((d.polygon.perimeter() - 2.0 * PI).abs() <= 1e-12 * 2.0 * PI, "{}", d.id);
            }
        }
    }

    #[test]
    fn hexagon_aspects() {
        let d = generate_domains(&config(Family::StretchedHexagon, 4, 0, Normalization::Area(1.0))).unwrap();
        for (dom, aspect) in d.iter().zip(STRETCH_ASPECTS) {
            let v = dom.polygon.vertices();
            let w = v.iter().map(|p| p.x).fold(f64::MIN, f64::max) - v.iter().map(|p| p.x).fold(f64::MAX, f64::min);
            let h = v.iter().map(|p| p.y).fold(f64::MIN, f64::max) - v.iter().map(|p| p.y).fold(f64::MAX, f64::min);
            assert!((w / h - aspect * 2.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.5, 0.5),
        ];
        let h = convex_hull(pts);
        assert_eq!(h.len(), 4);
        assert!(ConvexPolygon::new(h).is_ok());
    }

    #[test]
    fn ids_sort_in_order() {
        let d = generate_domains(&config(Family::RandomConvex, 12, 1, Normalization::Area(1.0))).unwrap();
        let ids: Vec<&str> = d.iter().map(|x| x.id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        assert!(d.iter().all(|x| x.polygon.len() >= 3));
    }
}

//! Fixtures shared by the criterion benches.

use torsion_core::harness::{generate_domains, Family, Normalization};
use torsion_core::{ConvexPolygon, ExperimentConfig};

/// A fixed seeded random polygon of unit area.
pub fn random_polygon() -> ConvexPolygon {
    let config = ExperimentConfig::new(Family::RandomConvex, 1, 7, Normalization::Area(1.0));
    generate_domains(&config).expect("seeded family").remove(0).polygon
}

/// Unit square, random polygon and a 64-gon of unit circumradius.
pub fn polygons() -> Vec<(&'static str, ConvexPolygon)> {
    vec![
        ("square", ConvexPolygon::unit_square()),
        ("random", random_polygon()),
        ("64-gon", ConvexPolygon::regular(64, 1.0).expect("regular polygon")),
    ]
}

use std::f64::consts::PI;

use proptest::prelude::*;
use torsion_core::fem::{discretize, solve_dirichlet_torsion, solve_robin_torsion, triangulate, Matrix};
use torsion_core::geometry::{
    coarea_area, inequality_checks, inner_parallel_body, inradius, level_profiles, summarize, ConvexPolygon, Point,
};
use torsion_core::harness::{generate_domains, ExperimentConfig, Family, Normalization, Status};
use torsion_core::parallel::dirichlet_lower_bound;
use torsion_core::radial::{
    critical_alpha, dimensional_constants, dirichlet_torsion_ball, dn_torsion_shell, robin_torsion_ball,
};
use torsion_core::thresholds::{lemma_function, threshold, LemmaFunction, ThresholdKind};
use torsion_core::{BallGeometry, ShellGeometry};

/// Points on a rotated ellipse at sorted angles are in convex position.
fn ellipse_polygon() -> impl Strategy<Value = ConvexPolygon> {
    (
        5usize..14,
        0.3f64..1.0,
        0.0f64..PI,
        prop::collection::vec(0.15f64..1.0, 14),
    )
        .prop_filter_map("degenerate polygon", |(n, b, turn, gaps)| {
            let total: f64 = gaps[..n].iter().sum();
            let (s, c) = turn.sin_cos();
            let mut th = 0.0f64;
            let v = gaps[..n]
                .iter()
                .map(|g| {
                    let (x, y) = (th.cos(), b * th.sin());
                    th += 2.0 * PI * g / total;
                    Point::new(c * x - s * y, s * x + c * y)
                })
                .collect();
            ConvexPolygon::new(v).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_area_is_d_times_volume(d in 1u32..=64) {
        let c = dimensional_constants(d);
        prop_assert!((c.sphere_area - d as f64 * c.ball_volume).abs() <= 4.0 * f64::EPSILON * c.sphere_area);
    }

    #[test]
    fn robin_ball_decreases_to_dirichlet(d in 1u32..=12, r in 0.1f64..5.0, a in 0.1f64..1e3) {
        let ball = BallGeometry::new(d, r).unwrap();
        let lo = robin_torsion_ball(&ball, a).unwrap();
        let hi = robin_torsion_ball(&ball, 2.0 * a).unwrap();
        let lim = dirichlet_torsion_ball(&ball);
        prop_assert!(lo >= hi && hi >= lim * (1.0 - 1e-14));
        let rate = dimensional_constants(d).sphere_area * r.powi(d as i32 + 1) / (d * d) as f64;
        prop_assert!(((lo - lim) - rate / a).abs() <= 1e-10 * lo);
    }

    #[test]
    fn ball_vanishes_at_critical_alpha(d in 1u32..=12, r in 0.1f64..5.0) {
        let ball = BallGeometry::new(d, r).unwrap();
        let v = robin_torsion_ball(&ball, critical_alpha(&ball)).unwrap();
        prop_assert!(v.abs() <= 1e-12 * r.powi(d as i32 + 2));
    }

    #[test]
    fn thin_hole_shell_matches_ball(d in 2u32..=12, r2 in 0.2f64..4.0, t in 1e-9f64..1e-4) {
        let shell = ShellGeometry::new(d, t * r2, r2).unwrap();
        let b = dirichlet_torsion_ball(&BallGeometry::new(d, r2).unwrap());
        // the planar hole costs O(t² log t) instead of O(t^d)
        let tol = if d == 2 { 10.0 * t * t * (1.0 - t.ln()) } else { 1e-10 };
        prop_assert!((dn_torsion_shell(&shell) - b).abs() <= tol * b);
    }

    #[test]
    fn thresholds_respect_bounds(d in 3u32..=12, t in 1e-4f64..0.9999) {
        for kind in [ThresholdKind::GeneralPerimeter, ThresholdKind::GeneralVolume] {
            let v = threshold(kind, d, t).unwrap().value;
            prop_assert!(v >= kind.bound() - 1e-9, "{kind} d={d} t={t}: {v}");
        }
        for kind in [ThresholdKind::ThreeDPerimeter, ThresholdKind::ThreeDVolume] {
            prop_assert!(threshold(kind, 3, t).unwrap().value >= kind.bound() - 1e-9);
        }
        prop_assert!(threshold(ThresholdKind::PlanarPerimeter, 2, t).unwrap().value >= 4.0 - 1e-9);
    }

    #[test]
    fn k_positive_inside(d in 3u32..=12, t in 0.001f64..0.999) {
        prop_assert!(lemma_function(LemmaFunction::K, d, t).unwrap() > 0.0);
        prop_assert!(lemma_function(LemmaFunction::G, d, t).unwrap() > 0.0);
    }

    #[test]
    fn inner_bodies_nest_and_shrink(p in ellipse_polygon(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let r = inradius(&p);
        let (s, t) = (a.min(b) * r * 0.999, a.max(b) * r * 0.999);
        prop_assume!(t - s > 1e-6 * r);
        let outer = inner_parallel_body(&p, s).unwrap().unwrap();
        let inner = inner_parallel_body(&p, t).unwrap().unwrap();
        for v in inner.vertices() {
            prop_assert!(outer.contains(*v, 1e-12));
        }
        prop_assert!(inner.perimeter() < outer.perimeter());
        prop_assert!(inner.area() < outer.area());
    }

    #[test]
    fn profile_slope_and_closure(p in ellipse_polygon()) {
        let s = summarize(&p);
        let grid: Vec<f64> = (0..40).map(|i| s.inradius * i as f64 / 40.0).collect();
        let prof = level_profiles(&p, &grid).unwrap();
        prop_assert!(prof.min_neg_slope() >= 2.0 * PI * (1.0 - 1e-12));
        prop_assert!(prof.max_uptick() <= 1e-12);
        let a = coarea_area(&p, 1e-12 * s.area).unwrap();
        prop_assert!((a - s.area).abs() <= 1e-9 * s.area);
        prop_assert!(inequality_checks(&s).pass);
        prop_assert!(s.inradius <= s.perimeter / (2.0 * PI));
    }

    #[test]
    fn polygon_json_round_trip(p in ellipse_polygon()) {
        let back = ConvexPolygon::from_json_str(&p.to_json_string()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn status_three_state(margin in -2.0f64..2.0, budget in 0.0f64..1.0) {
        let s = Status::classify(margin, budget);
        prop_assert_eq!(s == Status::Fail, margin < -budget);
        prop_assert_eq!(s == Status::Indeterminate, margin.abs() <= budget);
        prop_assert_eq!(s == Status::Pass, margin > budget);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lower_bound_sandwich_and_scaling(p in ellipse_polygon(), s in 0.3f64..3.0) {
        let r = dirichlet_lower_bound(&p).unwrap();
        prop_assert!(r.bound >= r.tau_dn - 1e-8 * r.tau_dn);
        prop_assert!(r.psi_m <= r.u_m * (1.0 + 1e-12));
        let scaled = dirichlet_lower_bound(&p.scaled(s)).unwrap();
        prop_assert!((scaled.bound - s.powi(4) * r.bound).abs() <= 1e-10 * scaled.bound);
    }

    #[test]
    fn seeded_families_are_reproducible(seed in any::<u64>(), count in 1usize..6) {
        for family in [Family::RandomConvex, Family::StretchedHexagon, Family::RegularNgon] {
            let c = ExperimentConfig::new(family, count, seed, Normalization::Area(1.0));
            let a = generate_domains(&c).unwrap();
            prop_assert_eq!(&a, &generate_domains(&c).unwrap());
            for d in &a {
                prop_assert!((d.polygon.area() - 1.0).abs() <= 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mesh_is_deterministic_and_valid(p in ellipse_polygon(), h in 0.08f64..0.4) {
        let a = triangulate(&p, h).unwrap();
        prop_assert_eq!(&a, &triangulate(&p, h).unwrap());
        a.validate(p.area()).unwrap();
        prop_assert!(a.h <= h);
    }

    #[test]
    fn system_invariants(p in ellipse_polygon()) {
        let sys = discretize(&p, 0.15).unwrap();
        let ones = vec![1.0; sys.n()];
        let k1 = sys.apply_matrix(Matrix::Stiffness, &ones);
        prop_assert!(k1.iter().all(|v| v.abs() <= 1e-12));
        let perim = sys.quadratic(Matrix::BoundaryMass, &ones);
        prop_assert!((perim - p.perimeter()).abs() <= 1e-10 * p.perimeter());
        let area: f64 = sys.load.iter().sum();
        prop_assert!((area - p.area()).abs() <= 1e-10 * p.area());
        prop_assert!(sys.asymmetry() == 0.0);
    }

    #[test]
    fn torsion_scales_quartically(p in ellipse_polygon(), s in 0.5f64..2.0, a in -0.4f64..-0.05) {
        // a mesh scaled with the domain keeps the discrete problem similar
        let base = discretize(&p, 0.2).unwrap();
        let big = discretize(&p.scaled(s), 0.2 * s).unwrap();
        prop_assume!(base.n() == big.n());
        let t0 = solve_robin_torsion(&base, a).unwrap().tau;
        let t1 = solve_robin_torsion(&big, a / s).unwrap().tau;
        prop_assert!((t1 - s.powi(4) * t0).abs() <= 1e-8 * t1.abs());
        let d0 = solve_dirichlet_torsion(&base).unwrap().tau;
        let d1 = solve_dirichlet_torsion(&big).unwrap().tau;
        prop_assert!((d1 - s.powi(4) * d0).abs() <= 1e-8 * d1);
    }
}

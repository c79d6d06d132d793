//! Worked harness cases on exact domains: the unit square against its
//! equal-area disk, the square lemma margin near α = 0, and the elongated
//! hexagon close to the Steklov edge.

use std::f64::consts::PI;

use torsion_core::harness::{
    generate_domains, sample_at, sweep_domains, Domain, Family, Normalization, Status, STRETCH_ASPECTS,
};
use torsion_core::radial::{robin_torsion_ball, BallGeometry};
use torsion_core::{ConvexPolygon, ExperimentConfig, VerificationRecord};

const SQUARE_TAU_D: f64 = 0.035144253738788454;

fn square() -> Domain {
    Domain {
        id: "square".into(),
        family: Family::RegularNgon,
        polygon: ConvexPolygon::unit_square(),
    }
}

fn square_config(fractions: &[f64]) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Family::RegularNgon, 1, 0, Normalization::Area(1.0));
    c.alpha_fractions = fractions.to_vec();
    c.mesh_h = 0.1;
    c
}

fn only(records: Vec<VerificationRecord>) -> VerificationRecord {
    assert_eq!(records.len(), 1, "{records:?}");
    records.into_iter().next().unwrap()
}

#[test]
fn unit_square_beats_equal_area_disk() {
    let r = only(sweep_domains(&[square()], &square_config(&[0.5])).unwrap().records);
    let ball = BallGeometry::new(2, 1.0 / PI.sqrt()).unwrap();
    assert_eq!(r.tau_ball, robin_torsion_ball(&ball, r.alpha).unwrap());
    assert!(
        (r.alpha + 0.5 * r.sigma1).abs() <= 0.5 * r.sigma1_budget + 1e-12,
        "{r:?}"
    );
    assert!(r.theorem_margin >= -r.theorem_budget, "{r:?}");
    assert_eq!(r.theorem_status, Status::Pass);
    assert!(
        (r.tau_dirichlet - SQUARE_TAU_D).abs() <= r.tau_dirichlet_budget.max(1e-6),
        "{r:?}"
    );
}

#[test]
fn unit_square_lemma_at_fixed_alpha() {
    let r = sample_at(&square(), &square_config(&[0.5]), -0.3).unwrap();
    assert_eq!(r.alpha, -0.3);
    assert!(r.lemma_margin >= -r.lemma_budget, "{r:?}");
    assert_ne!(r.lemma_status, Status::Fail);
}

#[test]
fn unit_square_lemma_near_zero_alpha() {
    let r = only(sweep_domains(&[square()], &square_config(&[0.05])).unwrap().records);
    // both sides are dominated by |Ω|²/(α|∂Ω|) here
    let correction = 1.0 / (r.alpha * 4.0);
    assert!(correction < -3.0 && r.tau_alpha < -3.0, "{r:?}");
    assert!(r.lemma_margin >= -r.lemma_budget, "{r:?}");
    assert!(r.lemma_margin.abs() < 1e-2 * correction.abs());
}

#[test]
fn alpha_outside_the_window_is_rejected() {
    let c = square_config(&[0.5]);
    assert!(sample_at(&square(), &c, 0.1).is_err());
    assert!(sample_at(&square(), &c, -10.0).is_err());
}

#[test]
fn stretched_hexagon_near_steklov_edge() {
    let mut c = ExperimentConfig::new(Family::StretchedHexagon, 4, 3, Normalization::Perimeter(2.0 * PI));
    c.alpha_fractions = vec![0.9];
    let domains = generate_domains(&c).unwrap();
    assert_eq!(STRETCH_ASPECTS[3], 5.0);
    let hex = domains.into_iter().nth(3).unwrap();
    let r = only(sweep_domains(std::slice::from_ref(&hex), &c).unwrap().records);
    assert!(r.theorem_margin >= -r.theorem_budget, "{r:?}");
    assert!(r.lemma_margin >= -r.lemma_budget, "{r:?}");
    assert_ne!(r.status, Status::Fail);
}

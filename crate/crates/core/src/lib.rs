//! Numerical toolkit for torsional rigidity of the Robin Laplacian with a
//! negative boundary parameter.
//!
//! The crate is organised bottom-up:
//!
//! * [`radial`] closed-form torsion of balls and Dirichlet–Neumann shells,
//!   ball Steklov spectrum and radial profiles.
//! * [`geometry`] exact convex-polygon kernel: summaries, inner parallel
//!   bodies, level profiles, Steiner and isoperimetric checks.
//! * [`thresholds`] smallness-condition curves and the auxiliary lemma
//!   functions, evaluated with cancellation-safe forms.
//! * [`parallel`] the parallel-coordinates trial function and its Rayleigh
//!   lower bound on Dirichlet torsion of convex polygons.
//! * [`fem`] P1 finite elements: meshing, assembly, Robin/Dirichlet torsion,
//!   Steklov spectrum and refinement-based error budgets.
//! * [`harness`] domain families, verification sweeps and reports.

// `!(x > 0.0)` is how NaN gets rejected along with the bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// frozen reference values keep every digit they were computed with
#![allow(clippy::excessive_precision)]

pub mod dd;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod parallel;
pub mod quadrature;
pub mod radial;
pub mod thresholds;

pub use error::{Error, Result};
pub use fem::{FemSystem, SolveResult, SteklovResult, TriangleMesh};
pub use geometry::{ConvexPolygon, GeometricSummary, InnerBodyProfile, Point};
pub use harness::{ExperimentConfig, VerificationRecord};
pub use parallel::{LowerBoundReport, MatchedShell, TrialProfile};
pub use radial::{BallGeometry, DimensionalConstants, RobinParameter, ShellGeometry};
pub use thresholds::{LemmaFunction, LemmaFunctionReport, ThresholdCurve, ThresholdKind};

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}")]
    InvalidDimension(i64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value {value} outside domain [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("Robin parameter alpha = 0 is the Neumann case; the torsion problem has no solution")]
    NeumannCase,

    #[error("degenerate shell: inner radius {r1} must be below outer radius {r2}")]
    DegenerateShell { r1: f64, r2: f64 },

    #[error("invalid polygon at vertex {vertex}: {reason}")]
    InvalidPolygon { vertex: usize, reason: String },

    #[error("geometry validation failed: {0}")]
    Geometry(String),

    #[error("quadrature failed to converge on [{a}, {b}] (estimate {estimate}, error {error})")]
    Quadrature { a: f64, b: f64, estimate: f64, error: f64 },

    #[error("mesh too fine: {projected} projected nodes exceeds the limit of {limit}")]
    MeshTooFine { projected: usize, limit: usize },

    #[error("mesh has no interior nodes; refine (target h = {0})")]
    EmptyInterior(f64),

    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("alpha = {alpha} is resonant: nearest discrete Steklov value is {nearest}")]
    Resonance { alpha: f64, nearest: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("refinement sequence invalid: {0}")]
    Refinement(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

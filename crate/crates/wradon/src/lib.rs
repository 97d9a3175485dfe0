//! Weighted Radon transforms over hyperplanes and weighted ray transforms in R^d.
//!
//! The crate evaluates R_W f by direct hyperplane quadrature and by the
//! decomposition into ray integrals along α(θ), and builds a 2D null pair
//! (w₀, f₀) that it lifts to a d-dimensional pair with R_W f = 0.

pub mod cli;
pub mod fields;
pub mod geometry;
pub mod nullpair;
pub mod quadrature;
pub mod transforms;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("expected a unit vector, got norm {0}")]
    NotUnit(f64),
    #[error("ray base is not the foot of the perpendicular (base·direction = {0:e})")]
    RayBase(f64),
    #[error("direction lies in the degenerate set; alpha(theta) is undefined")]
    DegenerateDirection,
    #[error("theta is parallel to eta; cross product vanishes")]
    ParallelEta,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("weight bound violated: sup|lambda*f0| = {ratio} exceeds {limit}")]
    WeightBoundViolation { ratio: f64, limit: f64 },
    #[error("f0 vanishes on every family line")]
    DegenerateF0,
    #[error("weight outside declared bounds: {0}")]
    WeightBounds(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse: {0}")]
    Parse(String),
}

pub use geometry::{Direction, Frame, Hyperplane, IntersectionKind, Ray};

use thiserror::Error;

use crate::geometry::Geometry;

/// Errors raised by the numerical routines.
///
/// Certificate outcomes (a void covering bound, a non-integrable-looking
/// kernel) are reported as verdicts in the result types, not as errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("signal supports do not overlap: [{a0}, {a1}] and [{b0}, {b1}]")]
    DisjointSupports { a0: f64, a1: f64, b0: f64, b1: f64 },

    #[error("geometry mismatch: expected {expected}, found {found}")]
    GeometryMismatch { expected: Geometry, found: Geometry },

    #[error("point ({x}, {y}) is not in the upper half-plane")]
    NotInHalfPlane { x: f64, y: f64 },

    #[error("signal is not admissible: {0}")]
    NotAdmissible(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("point set needs at least {needed} points, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("point sets differ in size: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("density check failed: grid point at distance {gap} from the set exceeds delta = {delta}")]
    DensityFailure { gap: f64, delta: f64 },

    #[error("inner ball of center {center} is not contained in its cell")]
    InnerBallViolation { center: usize },

    #[error("covering certificate is void: d1*d2 = {0} >= 1")]
    CertificateVoid(f64),

    #[error("ill-conditioned test basis: Gram condition number {0:e}")]
    IllConditioned(f64),

    #[error("frame algorithm diverged after {0} iterations")]
    Diverged(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

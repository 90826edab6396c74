use thiserror::Error;

/// Failures reported by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("curve is not simple: {0}")]
    NonSimpleCurve(String),

    #[error("tube half-width {half_width} exceeds the injectivity bound {bound}")]
    TubeTooWide { half_width: f64, bound: f64 },

    #[error("point lies outside the tubular neighbourhood (|r| = {offset:.3e}, half-width {half_width:.3e})")]
    OutsideTube { offset: f64, half_width: f64 },

    #[error("nearest-point projection did not converge")]
    ProjectionFailed,

    #[error("boundary condition violated: relative defect {defect:.3e} exceeds {tol:.3e}")]
    BoundaryCondition { defect: f64, tol: f64 },

    #[error("field has not decayed at the outer edge of the mesh (edge/max ratio {ratio:.3e})")]
    Truncation { ratio: f64 },

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("eigen-iteration stopped after {iterations} iterations with residual {residual:.3e} (tolerance {tol:.3e})")]
    NotConverged { iterations: usize, residual: f64, tol: f64 },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("window edge {edge} lies within {margin} of the eigenvalue {value}; shift the window")]
    WindowEdge { edge: f64, value: f64, margin: f64 },

    #[error("vector is zero")]
    ZeroVector,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

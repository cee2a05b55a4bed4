use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mollifier: {0}")]
    InvalidMollifier(String),

    #[error("kernel K0 diverges at r = 0; use -ln r + g0(r) instead")]
    Divergent,

    #[error("quadrature failed to converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("grid does not resolve scale {scale}: spacing {spacing} > e^-scale/4 = {limit}")]
    Unresolved { scale: f64, spacing: f64, limit: f64 },

    #[error(
        "circulant embedding is not positive definite: min eigenvalue {min_eigenvalue:e} \
         (relative {relative:e}) with torus side {torus} points"
    )]
    NotPositiveDefinite {
        min_eigenvalue: f64,
        relative: f64,
        torus: usize,
    },

    #[error("clipped spectral mass {fraction:e} exceeds the allowed fraction")]
    ExcessiveClipping { fraction: f64 },

    #[error("empty region")]
    EmptyRegion,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("covariance is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("degenerate fit window: {0}")]
    Window(String),

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

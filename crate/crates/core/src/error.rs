use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Hypothesis violations of a geometry or curvature model are not errors;
/// they are reported as data by the `validate_*` functions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("lattice sum diverges: exponent {exponent} <= lattice dimension {dim}")]
    Divergent { exponent: f64, dim: usize },

    #[error("quadrature did not reach rel_tol {rel_tol:e} after {doublings} doublings (best estimate {estimate:e})")]
    Tolerance {
        estimate: f64,
        rel_tol: f64,
        doublings: usize,
    },

    #[error("degenerate sampling: {0}")]
    DegenerateSampling(String),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("sign condition violated: {0}")]
    Sign(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request is mathematically valid but outside what this build supports.
    #[error("capability error: {0}")]
    Capability(String),

    /// Too few boundary samples to resolve the requested harmonics.
    #[error("aliasing: {samples} samples cannot resolve order {order} (need at least {required})")]
    Aliasing {
        samples: usize,
        order: usize,
        required: usize,
    },

    /// Two objects that must agree on (dim, R, kappa, N) do not.
    #[error("configuration mismatch: {0}")]
    Mismatch(String),

    /// A configuration key is missing or has an invalid value.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// Malformed text input (mesh file, trace CSV, N list).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A mesh violates one of its structural invariants.
    #[error("invalid mesh: {0}")]
    Mesh(String),

    /// The assembled system could not be factorized.
    #[error("singular system (condition estimate {condition_estimate:.3e}); kappa may be close to a resonance of the truncated problem")]
    Singular { condition_estimate: f64 },

    /// A nonlinearity produced NaN or infinity.
    #[error("non-finite nonlinearity value on element {element}")]
    NonFinite { element: usize },

    /// The fixed-point iteration diverged even after damping.
    #[error("fixed-point iteration diverged after {iterations} iterations (last contraction estimate {last_contraction:.3e}, damping {damping})")]
    Diverged {
        iterations: usize,
        last_contraction: f64,
        damping: f64,
    },

    /// A sweep entry failed; carries the truncation order that failed.
    #[error("solve failed at N = {order}: {source}")]
    Sweep {
        order: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

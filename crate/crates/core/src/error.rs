use thiserror::Error;

/// Errors raised anywhere in the model / solver / validation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidSpec(String),

    #[error(
        "quadrature did not converge on [{lo:e}, {hi:e}] after {subdivisions} subdivisions \
         (value {value:e}, error estimate {error:e})"
    )]
    NoConvergence {
        lo: f64,
        hi: f64,
        subdivisions: usize,
        value: f64,
        error: f64,
    },

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("denominator D_{n} = {value:e} is not positive; use a grid ratio closer to 1")]
    Denominator { n: usize, value: f64 },

    #[error("height y_{n} = {value:e} is negative after normalization")]
    NonPositive { n: usize, value: f64 },

    #[error("order {0} is not an integer; a solved density is needed to seed the recursion")]
    MissingDensity(f64),

    #[error("tail ratios did not stabilise: {0}")]
    NotConvergent(String),

    #[error("limit extrapolation is ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("only {found} probes below {bound:e}, need at least {needed}")]
    InsufficientGrid {
        found: usize,
        needed: usize,
        bound: f64,
    },

    #[error("exponential functional is almost surely infinite: {0}")]
    InfiniteFunctional(String),

    #[error("small-jump cutoff: {0}")]
    Cutoff(String),

    #[error("degenerate law: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable identifier, used for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Truncation(_) => "truncation",
            Error::Denominator { .. } => "denominator",
            Error::NonPositive { .. } => "non_positive",
            Error::MissingDensity(_) => "missing_density",
            Error::NotConvergent(_) => "not_convergent",
            Error::IllConditioned(_) => "ill_conditioned",
            Error::InsufficientGrid { .. } => "insufficient_grid",
            Error::InfiniteFunctional(_) => "infinite_functional",
            Error::Cutoff(_) => "cutoff",
            Error::Degenerate(_) => "degenerate",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// True for errors caused by the user's input rather than by a numerical failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_) | Error::Json(_) | Error::Io(_) | Error::Domain(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors produced by the approximation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown corpus id `{0}`")]
    UnknownCorpus(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain: {0}")]
    OutOfDomain(String),

    #[error("empty or degenerate interval [{0}, {1})")]
    EmptyInterval(f64, f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("quadrature inconsistency: {0}")]
    QuadratureInconsistency(String),

    #[error("unknown element or interval id: {0}")]
    UnknownId(String),

    #[error("refinement cap of {cap} levels reached: {detail}")]
    CapReached { cap: u32, detail: String },

    #[error("solver did not converge: {0}")]
    SolverFailure(String),

    #[error("incompatible mesh genealogies: {0}")]
    IncompatibleMeshes(String),

    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Prefixes the message with `ctx`, keeping the variant.
    pub fn context(self, ctx: &str) -> Self {
        let pre = |m: String| format!("{ctx}: {m}");
        match self {
            Error::UnknownCorpus(m) => Error::UnknownCorpus(m),
            Error::InvalidParameter(m) => Error::InvalidParameter(pre(m)),
            Error::OutOfDomain(m) => Error::OutOfDomain(pre(m)),
            e @ Error::EmptyInterval(..) => e,
            Error::NonFinite(m) => Error::NonFinite(pre(m)),
            Error::QuadratureInconsistency(m) => Error::QuadratureInconsistency(pre(m)),
            Error::UnknownId(m) => Error::UnknownId(pre(m)),
            Error::CapReached { cap, detail } => Error::CapReached {
                cap,
                detail: pre(detail),
            },
            Error::SolverFailure(m) => Error::SolverFailure(pre(m)),
            Error::IncompatibleMeshes(m) => Error::IncompatibleMeshes(pre(m)),
            Error::ZeroDenominator(m) => Error::ZeroDenominator(pre(m)),
            Error::InsufficientData(m) => Error::InsufficientData(pre(m)),
            Error::Config(m) => Error::Config(pre(m)),
            Error::Io(m) => Error::Io(pre(m)),
        }
    }

    /// True for errors caused by the input rather than by the computation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidParameter(_) | Error::UnknownCorpus(_) | Error::EmptyInterval(..)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

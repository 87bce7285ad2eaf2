use thiserror::Error;

/// Errors raised anywhere in the simulator.
///
/// Every variant maps onto a short, stable category string (see
/// [`Error::category`]) which the command-line front end prints on failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error(
        "gain exponent K*lambda/hbar = {exponent:.3} exceeds {limit}; \
         renormalize more often or reduce lambda"
    )]
    Overflow { exponent: f64, limit: f64 },

    #[error(
        "momentum aliasing: edge probability fraction {fraction:.3e} exceeds {tolerance:.1e} \
         after kick {kick}; increase n_points"
    )]
    Aliasing {
        kick: usize,
        fraction: f64,
        tolerance: f64,
    },

    #[error("non-finite amplitude after kick {0}")]
    NonFinite(usize),

    #[error("fit domain: {0}")]
    FitDomain(String),

    #[error("K = {k} is outside the quantized domain: {reason}")]
    OutOfDomain { k: f64, reason: String },

    #[error("snap tie: drifted angle {theta} is equidistant from two plateaus")]
    SnapTie { theta: f64 },

    #[error("dense matrix size {requested} exceeds cap {cap}")]
    SizeCap { requested: usize, cap: usize },

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("{0}")]
    Config(String),

    #[error("table: {0}")]
    Table(String),

    #[error("io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::DegenerateState(_) => "degenerate-state",
            Error::Overflow { .. } => "parameter-overflow",
            Error::Aliasing { .. } => "aliasing",
            Error::NonFinite(_) => "non-finite",
            Error::FitDomain(_) => "fit-domain",
            Error::OutOfDomain { .. } => "out-of-domain",
            Error::SnapTie { .. } => "boundary",
            Error::SizeCap { .. } => "size-cap",
            Error::OracleMismatch(_) => "oracle-mismatch",
            Error::Config(_) => "invalid-config",
            Error::Table(_) => "table-format",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

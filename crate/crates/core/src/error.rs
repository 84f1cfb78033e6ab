use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid coupling site {site} for a chain of {sites} oscillators")]
    InvalidSite { site: usize, sites: usize },
    #[error("{what} did not converge (residual {residual:.3e})")]
    Convergence { what: String, residual: f64 },
    #[error("imaginary-time energy increased by {increase:.3e} at tau = {tau}")]
    NonMonotoneEnergy { increase: f64, tau: f64 },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("dense dimension {0} exceeds the guard")]
    DimensionOverflow(usize),
    #[error("config error{}: {msg}", if *line > 0 { format!(" at line {line}") } else { String::new() })]
    Config { line: usize, msg: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config { line, msg: msg.into() }
    }

    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::NonMonotoneEnergy { .. } | Error::Fit(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

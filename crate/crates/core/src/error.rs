use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid beam: {0}")]
    InvalidBeam(String),
    #[error("radius {rho:.6e} a.u. lies outside the near-axis validity region ({limit:.6e} a.u.)")]
    OutsideValidity { rho: f64, limit: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn no_convergence(what: &'static str, detail: impl Into<String>) -> Self {
        Error::NonConvergence { what, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

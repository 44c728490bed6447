use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degree {n} out of range for basis with n_max = {n_max}")]
    DegreeOutOfRange { n: usize, n_max: usize },

    #[error("group element {element} does not belong to {model}")]
    GroupMismatch { model: String, element: String },

    #[error("invalid spec at {path}: {message}")]
    InvalidSpec { path: String, message: String },

    #[error("group element {0} is not on the coefficient grid")]
    OffGrid(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureConvergence(String),

    #[error("eigen-solver failed to converge after {0} iterations")]
    EigenConvergence(usize),

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("kernel is not real-valued on the configuration (imaginary residue {0:e})")]
    NotRealValued(f64),

    #[error("kernel is not a finite monomial expansion")]
    NotMonomialExpansion,

    #[error("kernel fails positive semidefiniteness at the configuration (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(path: &str, message: impl Into<String>) -> Self {
        Error::InvalidSpec {
            path: if path.is_empty() { "$".to_string() } else { path.to_string() },
            message: message.into(),
        }
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureConvergence(_)
                | Error::EigenConvergence(_)
                | Error::Factorization(_)
                | Error::NotPositiveSemidefinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

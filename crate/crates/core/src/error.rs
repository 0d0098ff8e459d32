use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the domain where the quantity is defined.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Constructor preconditions violated.
    #[error("invalid construction: {0}")]
    Construction(String),

    /// The model is outside the class an operation supports.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The model data contradicts the admissibility assumptions (LICM, Bernstein).
    #[error("model validity: {0}")]
    ModelValidity(String),

    #[error("duality solver did not converge: residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Solver { residual: f64, tolerance: f64 },

    #[error("inverse Laplace transform failed at t = {t}: {detail}")]
    Inversion { t: f64, detail: String },

    /// A numerical hypothesis check refused the operation.
    #[error("hypothesis violated at t = {at:.6e}: {detail}")]
    Hypothesis { at: f64, detail: String },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("config error at {path}: {detail}")]
    Config { path: String, detail: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

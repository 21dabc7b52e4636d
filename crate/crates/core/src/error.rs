use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("metric is singular at rho = {rho}")]
    Singular { rho: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid under-resolved at stage ({k},{i}): {detail}")]
    Resolution { k: usize, i: usize, detail: String },

    #[error("immersion lost at stage ({k},{i}) near rho = {rho}, phi = {phi}: lambda = {lambda:e}")]
    ImmersionLoss {
        k: usize,
        i: usize,
        rho: f64,
        phi: f64,
        lambda: f64,
    },

    #[error("cone violation at stage ({k},{i}): eta = {eta:e} at rho = {rho}, phi = {phi}")]
    ConeViolation {
        k: usize,
        i: usize,
        rho: f64,
        phi: f64,
        eta: f64,
    },

    #[error("corrugation budget exceeded at stage ({k},{i}): no N <= {cap} satisfies {condition}")]
    BudgetExceeded {
        k: usize,
        i: usize,
        cap: u64,
        condition: String,
    },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

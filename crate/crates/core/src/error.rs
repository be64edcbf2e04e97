use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("function is additive at every grid pair; no positive slack exists")]
    EverywhereAdditive,
    #[error("perturbation vanishes at every grid vertex")]
    ZeroPerturbation,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("malformed residue: {0}")]
    MalformedResidue(String),
    #[error("certificate verification failed: {0}")]
    VerificationFailure(String),
    #[error("decision paths disagree: {0}")]
    PathDisagreement(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use tailcert::{CertError, NetError, SampleError, VerifyError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0:?}")]
    ScenarioUnknown(String),
    #[error("dimension {d} exceeds the limit {limit} for {scenario}")]
    DimensionTooLarge { scenario: String, d: usize, limit: usize },
    #[error("oracle budget exceeded: {0}")]
    OracleBudgetExceeded(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

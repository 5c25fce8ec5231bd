use thiserror::Error;

/// Errors raised by certificate construction, the combinators and the verifier.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertError {
    #[error("invalid certificate: {0}")]
    Invalid(String),
    #[error("query outside the certificate domain: {0}")]
    OutOfDomain(String),
    #[error("certificate carries unfitted symbolic constants: {0:?}")]
    SymbolicConstants(Vec<String>),
    #[error("power transform exponent must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("modulus of continuity does not vanish at zero: {0}")]
    BadModulus(String),
    #[error("domination evidence too weak: {0}")]
    DominationTooWeak(String),
    #[error("strengthening to all n requires the non-zero size assertion")]
    MissingAssertion,
    #[error("index set too large for the tail rate: {0}")]
    CardinalityTooLarge(String),
    #[error("self-bounding Lipschitz hypothesis was not asserted")]
    MissingLipschitzAssertion,
    #[error("size or rate sequences do not match")]
    MismatchedSizeOrRate,
    #[error("rate sequence too small: {0}")]
    RateTooSmall(String),
    #[error("rate sequence must be at least one: {0}")]
    RateBelowOne(String),
    #[error("rate sequence below the declared dimension multiple: {0}")]
    RateBelowDimension(String),
    #[error("unsupported alpha {0}; expected 1 or 2")]
    BadAlpha(f64),
    #[error("sequence evaluation failed: {0}")]
    Sequence(String),
}

/// Errors from the sampling layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("bad distribution spec: {0}")]
    BadSpec(String),
    #[error("absolute moments unavailable for {0}")]
    MomentsUnavailable(String),
    #[error("psi norm is zero; cannot rescale")]
    ZeroNorm,
}

/// Errors from net construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("epsilon {eps} outside (0, {diameter})")]
    EpsilonOutOfRange { eps: f64, diameter: f64 },
    #[error("point budget {0} exhausted before the stopping rule fired")]
    BudgetExceeded(usize),
    #[error("invalid space: {0}")]
    BadSpace(String),
    #[error("strategy {0} not available for this space")]
    UnsupportedStrategy(String),
}

/// Errors from the Monte-Carlo verifier.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("bad probe grid: {0}")]
    BadGrid(String),
    #[error("certificate carries unfitted symbolic constants: {0:?}")]
    SymbolicConstants(Vec<String>),
    #[error("no probe lies inside the certificate domain")]
    NoInDomainProbes,
    #[error("no constant assignment on the search grid passes")]
    Unsatisfiable,
    #[error("too few probes with enough exceedances: {0}")]
    InsufficientExceedances(String),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

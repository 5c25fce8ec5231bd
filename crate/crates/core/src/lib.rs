//! Tail-bound certificates for sequences of random variables.
//!
//! A certificate states `P(|Xₙ| ≥ t·|Yₙ|) ≤ C1·exp(−rₙ·f(t))` with explicit
//! constants. The crate provides the certificate types, combinators for
//! sums, products, powers, truncation and suprema, constructors for common
//! distributional hypotheses, ε-nets, seeded samplers and a Monte-Carlo
//! verifier that checks certificates against empirical tails.

pub mod algebra;
pub mod catalog;
pub mod discrete;
pub mod cert;
pub mod error;
pub mod float;
pub mod nets;
pub mod rate;
pub mod rng;
pub mod samplers;
pub mod sequence;
pub mod special;
pub mod verify;

pub use algebra::{
    add, continuous_transform_o, covering_supremum, eval_bound, finite_max, multiply,
    power_transform, strengthen_to_all_n, theta_pair, truncate, LipschitzTerm,
};
pub use cert::{
    CertificateParts, ConstantsStatus, Direction, DominationEvidence, Flavor, IndexFamily,
    IndexRates, IndexSizes, LowerTailCertificate, Provenance, SmallnessWitness, TailCertificate,
    ThetaCertificate, UniformCertificate,
};
pub use error::{CertError, NetError, SampleError, VerifyError};
pub use rate::{Constant, LowerRateFunction, RateFunction};
pub use sequence::{Dimension, EvalRange, Modulus, ProbSequence, RateSequence, SizeSequence, Table};

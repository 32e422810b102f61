use alloc::string::String;

use crate::numerics::Mode;

/// Errors raised by the ensemble computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty-sum: log_sum_exp needs at least one term")]
    EmptySum,
    #[error("mixed backends: {0:?} value combined with {1:?} value")]
    MixedBackends(Mode, Mode),
    #[error("non-positive weight: {0}")]
    NonPositiveWeight(String),
    #[error("inverse temperature must be positive, got {0}")]
    NonPositiveBeta(String),
    #[error(
        "exact-weight-unrepresentable: beta * energy = {0} is not an integer power of the log base; supply weights directly"
    )]
    ExactWeightUnrepresentable(String),
    #[error("log base must lie strictly between 0 and 1, got {0}")]
    InvalidLogBase(String),
    #[error("exact mode needs a rational inverse temperature and a log base")]
    ExactBetaRequired,
    #[error("invalid level set: {0}")]
    InvalidLevelSet(&'static str),
    #[error("empty weight vector")]
    EmptyWeights,
    #[error("level index {index} out of range for {len} levels")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("level index {0} listed twice")]
    DuplicateIndex(usize),
    #[error("removing the last level requires an explicit opt-in")]
    LastLevel,
    #[error("levels i and j must differ (got {0} twice)")]
    SameLevel(usize),
    #[error("not-a-superset: weight {0} of the smaller spectrum has no partner left")]
    NotASuperset(String),
    #[error("instance-too-large: {configs} configurations exceed the cap of {cap}")]
    InstanceTooLarge { configs: String, cap: u64 },
    #[error("zero partition function at N = {0}")]
    ZeroPartition(usize),
    #[error("partitions are defined for N >= 1, got {0}")]
    NonPositivePartitionTarget(usize),
    #[error("caps must be positive integers")]
    InvalidCaps,
    #[error("caps-bind: m = {m} exceeds the cap p_{position} = {cap}")]
    CapsBind { m: i64, position: usize, cap: u32 },
    #[error("energies-required: this quantity needs the level energies, not just weights")]
    EnergiesRequired,
    #[error("the condensate fraction needs N >= 1")]
    NoParticles,
    #[error("beta grid must be nonempty and strictly increasing")]
    InvalidBetaGrid,
    #[error("{what} = {value} exceeds the configured limit {limit}")]
    LimitExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("invalid campaign config: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

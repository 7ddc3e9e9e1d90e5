use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("port `{0}` must have a non-empty domain of distinct values")]
    InvalidDomain(String),

    #[error("port `{0}` appears more than once in a signature")]
    DuplicatePort(String),

    #[error("horizon must be at least one step")]
    ZeroHorizon,

    #[error("horizon mismatch: {left} vs {right} steps")]
    HorizonMismatch { left: usize, right: usize },

    #[error("enumeration of {runs} runs exceeds the cap of {cap}")]
    Capacity { runs: u128, cap: u64 },

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("port `{0}` has different domains in the two signatures")]
    DomainConflict(String),

    #[error("port `{0}` is controlled on one side and uncontrolled on the other")]
    RoleConflict(String),

    #[error("port `{0}` is controlled by both contracts")]
    ControlledOverlap(String),

    #[error("port `{0}` is probabilistic in both contracts")]
    ProbabilisticOverlap(String),

    #[error("probabilistic port `{0}` is controlled by the peer contract")]
    ProbabilisticControlledByPeer(String),

    #[error("port roles violate the satisfaction precondition: {0}")]
    PortRoles(String),

    #[error("port `{0}` is not a probabilistic port of the contract")]
    NotProbabilistic(String),

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityRange(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("distribution is not the marginal of the refined contract's distribution over {0}")]
    MarginalMismatch(String),

    #[error("name `{0}` is already used in this signature")]
    NameClash(String),

    #[error("value `{value}` is not in the domain of port `{port}`")]
    UnknownValue { port: String, value: String },
}

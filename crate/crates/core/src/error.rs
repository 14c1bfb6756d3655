use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sample count must be >= 1")]
    NoSamples,

    #[error("quadrature needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },

    #[error("density of model `{0}` has unbounded support; quadrature unavailable, use Monte Carlo")]
    UnboundedSupport(String),

    #[error("density of model `{model}` integrates to {integral}, expected 1")]
    DensityNotNormalized { model: String, integral: f64 },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("source `{source_name}` has no data for angle pair ({delta}, {gamma})")]
    MissingAnglePair {
        source_name: String,
        delta: f64,
        gamma: f64,
    },

    #[error("source `{0}` does not provide joint probabilities")]
    NoJointProbabilities(String),

    #[error("settings pair `{0}` has no trials")]
    EmptyPair(String),

    #[error("invalid settings schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

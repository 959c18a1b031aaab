use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input to sgn: {0}")]
    NonFinite(f64),
    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },
    #[error("cannot normalize a zero or non-finite vector")]
    ZeroVector,
    #[error("unsupported sphere dimension {0}, expected 3 or 4")]
    Dimension(usize),
    #[error("rejection sampler exceeded {cap} attempts")]
    SamplingFailure { cap: u64 },
    #[error("M-box input {0} outside [0, 1]")]
    MBoxDomain(f64),
    #[error("gamma {0} outside (0, pi/4]")]
    GammaRange(f64),
    #[error("auxiliary-vector denominator {0:e} is degenerate")]
    DegenerateAux(f64),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("run transcript already closed")]
    TranscriptClosed,
    #[error("resource accounting violation: {0}")]
    Resource(String),
    #[error("infeasible flip parameters: {0}")]
    InfeasibleFlip(String),
    #[error("invalid counts: {0}")]
    Counts(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

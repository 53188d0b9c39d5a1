use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("every amplitude fell below the grain threshold")]
    AllAnnihilated,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("time step {dt} exceeds the stability bound {bound} for this grid")]
    Stability { dt: f64, bound: f64 },
    #[error("failed to converge: {0}")]
    Convergence(String),
    #[error("iteration limit {0} reached")]
    MaxIterations(usize),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("quantum {id} moves {shift} lattice units in one micro-step")]
    SpeedCap { id: u64, shift: f64 },
    #[error("bubble holds no quanta")]
    EmptyBubble,
    #[error("all token branches cancelled")]
    AllCancelled,
    #[error("size {size} exceeds the cap {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("term {0} does not contribute at the given configuration")]
    NotContributing(usize),
    #[error("terms {0} and {1} of the canonical state overlap")]
    NotOrthogonal(usize, usize),
    #[error("machine halted after {steps} steps")]
    Halt { steps: u64 },
    #[error("rules {0} and {1} match the same configuration")]
    Nondeterminism(usize, usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cache entry corrupted: {0}")]
    CacheCorrupted(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}

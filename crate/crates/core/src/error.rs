use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("duplicate target spin {0}")]
    DuplicateTarget(usize),
    #[error("spin index {index} out of range for {n} spins")]
    SpinRange { index: usize, n: usize },
    #[error("invalid spin system: {0}")]
    InvalidSystem(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no coupling path between spins {0} and {1}")]
    NoCoupling(usize, usize),
    #[error("phase step of {step:.2} degrees per slice exceeds {limit} degrees")]
    CoarsePhaseRamp { step: f64, limit: f64 },
    #[error("spectator resonant with carrier (zero separation)")]
    ZeroSeparation,
    #[error("infeasible refocusing request: {0}")]
    Infeasible(String),
    #[error("readout set is rank deficient (rank {rank} < {needed})")]
    RankDeficient { rank: usize, needed: usize },
    #[error("aliasing: line at {freq_hz} Hz exceeds Nyquist {nyquist_hz} Hz")]
    Aliasing { freq_hz: f64, nyquist_hz: f64 },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

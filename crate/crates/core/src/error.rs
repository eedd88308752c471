use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("game already finished at tick {tick}")]
    GameOver { tick: u64 },

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("session {session}: timestamp {timestamp} at line {line} does not increase")]
    NonMonotoneTimestamps {
        session: String,
        line: u64,
        timestamp: f64,
    },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("window {0} has no arousal samples in any session")]
    EmptyWindow(usize),

    #[error("index {index} out of range for length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("history lengths differ: {h} estimates vs {a} targets")]
    LengthMismatch { h: usize, a: usize },

    #[error("empty history")]
    EmptyHistory,

    #[error("{what} = {value} is outside [0, 1]")]
    OutOfUnitRange { what: &'static str, value: f64 },

    #[error("optimal score must be positive, got {0}")]
    NonPositiveOptimal(i64),

    #[error("archive is empty")]
    EmptyArchive,

    #[error("trajectory of {len} actions exceeds the session length of {max} ticks")]
    TrajectoryTooLong { len: usize, max: u64 },

    #[error("need at least {need} sessions, got {got}")]
    TooFewSessions { need: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

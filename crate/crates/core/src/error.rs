use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("normal-form oracle `{oracle}` failed: {msg}")]
    OracleFailure { oracle: String, msg: String },

    #[error("radius {radius} exceeds the cap {cap} for `{preset}` (estimated {estimate} vertices)")]
    CapExceeded {
        preset: String,
        radius: u32,
        cap: u32,
        estimate: u128,
    },

    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),

    #[error("ball exceeds horizon: radius {radius} > horizon radius {horizon}")]
    BallExceedsHorizon { radius: u32, horizon: u32 },

    #[error("vertex {0} is outside the horizon")]
    OutsideHorizon(u32),

    #[error("radius {radius} (level {level}) violates the horizon margin: {reason}")]
    BadRadius { level: usize, radius: u32, reason: String },

    #[error("invalid scaled space: {0}")]
    InvalidSpace(String),

    #[error("algebra too large for exhaustive mode: {0}")]
    TooLarge(String),

    #[error("induced algebra hypothesis fails for bounded set {bounded:?}: bounded components have unbounded union")]
    InducedHypothesis { bounded: Vec<usize> },

    #[error("subset is not closed: its complement is not a union of algebra elements")]
    NotClosed,

    #[error("compactification check failed: {0}")]
    Verification(String),

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("horizon too small: {0}")]
    HorizonTooSmall(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("invalid set expression `{0}`")]
    SetExpr(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("internal invariant breached: {0}")]
    Internal(String),
}

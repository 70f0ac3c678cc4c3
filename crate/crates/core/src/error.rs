use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element} does not belong to group family {family}")]
    FamilyMismatch { family: String, element: String },

    #[error("elements live over different groups: {left} vs {right}")]
    SpecMismatch { left: String, right: String },

    #[error("invalid group spec: {0}")]
    InvalidSpec(String),

    #[error("element {0} lies outside the enumerated ball")]
    OutOfBall(String),

    #[error("ball enumeration exceeded the cap of {cap} elements at radius {radius}")]
    BallCapExceeded { cap: usize, radius: u32 },

    #[error("morphism violates relation: {0}")]
    RelationViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// `ln_value` and `ln_tail` are natural logarithms.
    #[error("tail bound exp({ln_tail}) exceeds {fraction:e} of truncated value exp({ln_value}) at {at}")]
    TailNotNegligible {
        at: String,
        ln_value: f64,
        ln_tail: f64,
        fraction: f64,
    },

    #[error("cache file is corrupt: {0}")]
    CacheCorrupt(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

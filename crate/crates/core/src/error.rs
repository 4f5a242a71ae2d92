use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid weight sequence: {0}")]
    InvalidSequence(String),

    #[error("index {index} is not representable by the closed form")]
    Unrepresentable { index: String },

    #[error("sequence `{0}` has no closed form for sparse evaluation")]
    NoSparseForm(String),

    #[error("index {k} exceeds the stored prefix (length {len}) and no closed form is attached")]
    BeyondPrefix { k: usize, len: usize },

    #[error("composition table requested up to k = {k}, above the configured cap {cap}")]
    DpCapExceeded { k: usize, cap: usize },

    #[error("{what}: k = {k} exceeds the supported maximum {max}")]
    TooLarge { what: &'static str, k: usize, max: usize },

    #[error("piecewise-linear function is not convex: slope decreases at knot {knot}")]
    NonConvex { knot: usize },

    #[error("argument {u} lies beyond the conjugate horizon {horizon}")]
    OutOfHorizon { u: f64, horizon: f64 },

    #[error("jet has zero constant term; reciprocal does not exist")]
    ZeroConstantTerm,

    #[error("jet has zero linear term; functional inverse does not exist")]
    ZeroLinearTerm,

    #[error("inner jet must vanish at the origin for composition")]
    NotCentered,

    #[error("ODE field truncated at order {have}, but order {needed} is required")]
    UnderTruncated { needed: usize, have: usize },

    #[error("Neumann series diverges: A*C = {ac} >= 1")]
    Divergent { ac: f64 },

    #[error("no rai witness for row {lambda}: {reason}")]
    NoRaiWitness { lambda: usize, reason: String },

    #[error("stage `{stage}` failed: {reason}")]
    Stage { stage: &'static str, reason: String },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn stage(stage: &'static str, inner: Error) -> Self {
        Error::Stage {
            stage,
            reason: alloc::format!("{inner}"),
        }
    }
}

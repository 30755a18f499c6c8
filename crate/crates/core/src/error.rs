use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty hypergraph")]
    EmptyHypergraph,

    #[error("empty face")]
    EmptyFace,

    #[error("face set not closed under intersection: {missing} is missing")]
    NotClosed { missing: String },

    #[error("{sub} is not a subface of {sup}")]
    NotASubface { sub: String, sup: String },

    #[error("unknown vertex {vertex}")]
    UnknownVertex { vertex: u32 },

    #[error("cardinality of vertex {vertex} must be at least 1")]
    InvalidCardinality { vertex: u32 },

    #[error("duplicate face {face}")]
    DuplicateFace { face: String },

    #[error("face {face} not declared in the model")]
    UnknownFace { face: String },

    #[error("invalid face key {key:?}")]
    BadFaceKey { key: String },

    #[error("tensor on face {face}: expected {expected} values, got {got}")]
    TensorLength {
        face: String,
        expected: usize,
        got: usize,
    },

    #[error("unsupported layout {got:?}, expected \"row-major-sorted-vertices\"")]
    BadLayout { got: String },

    #[error("non-finite value in tensor on face {face}")]
    NonFinite { face: String },

    #[error("field does not match the nerve: expected {expected} entries, got {got}")]
    FieldMismatch { expected: usize, got: usize },

    #[error("beliefs on face {face} are not normalized (error {error:e})")]
    NotNormalized { face: String, error: f64 },

    #[error("missing beliefs for face {face}")]
    MissingBelief { face: String },

    #[error("state space too large: {size} entries exceeds cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: usize },

    #[error("{0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

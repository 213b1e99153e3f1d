use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("duplicate vertex id {0:?}")]
    DuplicateVertex(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("non-finite or nonpositive measure mu({id:?}) = {mu}")]
    NonPositiveMeasure { id: String, mu: f64 },
    #[error("non-finite or nonpositive edge weight w({u:?},{v:?}) = {w}")]
    NonPositiveWeight { u: String, v: String, w: f64 },
    #[error("self-loop at vertex {0:?}")]
    SelfLoop(String),
    #[error("duplicate edge {0:?}-{1:?}")]
    DuplicateEdge(String, String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("vertex {0:?} is not part of the graph's vertex set")]
    NotSubset(String),
    #[error("non-finite value {value} for vertex {vertex:?}")]
    NonFiniteField { vertex: String, value: f64 },
    #[error("nonpositive field value {value} at vertex {vertex:?}")]
    NonPositiveField { vertex: String, value: f64 },
    #[error("invalid dimension {0}: must be > 0")]
    InvalidDimension(f64),
    #[error("vertex {0:?} is isolated")]
    IsolatedVertex(String),
    #[error("vertex subset has empty interior")]
    EmptyInterior,
    #[error("vertex {0:?} is outside interior")]
    OutsideInterior(String),
    #[error("invalid time {0}")]
    InvalidTime(f64),
    #[error("empty time grid")]
    EmptyTimeGrid,
    #[error("subset of {size} vertices exceeds the limit of {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("eigensolver failure: {0}")]
    Eigen(String),
    #[error("quadrature did not converge: last refinement changed the value by {delta:e}")]
    Quadrature { delta: f64 },
}

impl Error {
    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Eigen(_) | Error::Quadrature { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} has {degree} neighbours, degree bound is {bound}")]
    DegreeExceeded {
        vertex: usize,
        degree: usize,
        bound: usize,
    },
    #[error("edge {{{u}, {v}}} has weight ratio {ratio} outside [1/K, K] for K = {bound}")]
    RatioBoundViolated {
        u: usize,
        v: usize,
        ratio: f64,
        bound: f64,
    },
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("self loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("size mismatch: {0} vs {1} vertices")]
    SizeMismatch(usize, usize),
    #[error("instance too large for exact computation: {0}")]
    TooLarge(String),
    #[error("vertex sets differ: {0} vs {1} vertices")]
    VertexSetMismatch(usize, usize),
    #[error("unsupported property: {0}")]
    UnsupportedProperty(String),
    #[error("no partition found: {0}")]
    Infeasible(String),
    #[error("unsupported graph family: {0}")]
    UnsupportedFamily(String),
    #[error("local rule has no entry for a decorated ball")]
    RuleIncomplete,
    #[error("partition-based estimator failed: {0}")]
    PartitionInfeasible(String),
    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

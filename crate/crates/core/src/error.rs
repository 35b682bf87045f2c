use thiserror::Error;

/// Errors produced while building models or running an analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed topology JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("network must have at least one vertex")]
    NoVertices,

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("vertex index {index} out of range 1..={vertex_count}")]
    IndexOutOfRange { index: usize, vertex_count: usize },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("vertex {vertex} listed twice in the {set} set")]
    DuplicateVertex { vertex: usize, set: &'static str },

    #[error("could not draw a well-conditioned instance (I - G) after {attempts} attempts")]
    IllConditioned { attempts: usize },

    #[error("numeric rank {numeric} disagrees with the disjoint-path count {paths}")]
    RankMismatch { numeric: usize, paths: usize },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("graph is not a single directed cycle through every vertex")]
    NotACircle,

    #[error("module recovery requires an identifiable circle with |R| >= 2 and |C| >= 2")]
    RecoveryPrecondition,

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("matrix has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    Shape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

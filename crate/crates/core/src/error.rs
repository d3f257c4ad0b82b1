use thiserror::Error;

/// Errors produced anywhere in the detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: node index {index} out of range for N = {n}")]
    Range { line: usize, index: usize, n: usize },

    #[error("line {line}: self-loop on node {node} in layer {layer}")]
    SelfLoop { line: usize, node: usize, layer: usize },

    #[error("line {line}: duplicate edge ({i}, {j}) in layer {layer}")]
    Duplicate { line: usize, layer: usize, i: usize, j: usize },

    #[error("inconsistent input: {0}")]
    Consistency(String),

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("node {node} in layer {layer} has zero multilayer degree")]
    DegenerateDegree { node: usize, layer: usize },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("informative eigenvalue {0} >= 1; no valid scale range")]
    NoScaleRange(f64),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage { stage, source: Box::new(source) }
    }

    /// Innermost error, skipping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

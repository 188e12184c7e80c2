use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("frequency undefined on an empty relation")]
    UndefinedFrequency,

    #[error("conditional frequency undefined: no rows match {0}")]
    UndefinedConditional(String),

    #[error("unsupported dependency: {0}")]
    UnsupportedDependency(String),

    #[error("dependency {0} is not covered by any relation")]
    Coverage(String),

    #[error("dependencies induce a cycle: {}", .0.join(" -> "))]
    CyclicNetwork(Vec<String>),

    #[error("decomposition error: {0}")]
    Decomposition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("no data: {0}")]
    NoData(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("incompatible evidence: {0}")]
    IncompatibleEvidence(String),

    #[error("propagation did not converge after {0} sweeps")]
    Convergence(usize),

    #[error("scope error: {0}")]
    Scope(String),

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
}

impl Error {
    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }
}

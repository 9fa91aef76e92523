use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),
    #[error("invalid marking: {0}")]
    InvalidMarking(String),
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("vertex `{0}` is not trivalent")]
    NotTrivalent(String),
    #[error("weighting is not in the spin diagram semigroup")]
    NotInSemigroup,
    #[error("face is empty at every probe level")]
    EmptyFace,
    #[error("graph is not leafless: vertex `{0}` has valence < 2")]
    NotLeafless(String),
    #[error("momentum residual {0:.3e} exceeds tolerance")]
    NotMomentumZero(f64),
    #[error("edge `{0}` has near-zero momentum vector")]
    ZeroMomentumEdge(String),
    #[error("gradient flow failed to converge: residual {residual:.3e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

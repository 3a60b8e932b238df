use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid embedded graph: {0}")]
    InvalidGraph(String),

    #[error("invalid graph map: {0}")]
    InvalidMap(String),

    #[error("path does not live in this graph: {0}")]
    PathMismatch(String),

    #[error("invalid genus: {0}")]
    Genus(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("curve is not realizable as a simple closed curve: {0}")]
    CurveNotRealizable(String),

    #[error("invalid move: {0}")]
    InvalidMove(String),

    #[error("invariant violated after {step}: {detail}")]
    InvariantViolation { step: String, detail: String },

    #[error("power iteration did not converge within {0} iterations")]
    SpectralNotConverged(usize),

    #[error("train track algorithm exceeded {cap} rounds (last moves: {trace})")]
    IterationCap { cap: usize, trace: String },

    #[error("circle packing failed: {0}")]
    Packing(String),

    #[error("layout failed: {0}")]
    Layout(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("analysis failed: {0}")]
    Analysis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

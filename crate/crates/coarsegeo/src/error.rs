use thiserror::Error;

/// Errors raised across the library. Each variant names the offending input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown symbol `{symbol}` at byte {offset}")]
    Alphabet { symbol: String, offset: usize },

    #[error("element does not belong to model `{model}`: {detail}")]
    ModelMismatch { model: String, detail: String },

    #[error("ball of radius {radius} exceeds the vertex budget {budget} (reached {reached} vertices at radius {reached_radius})")]
    Budget {
        radius: u32,
        budget: usize,
        reached: usize,
        reached_radius: u32,
    },

    #[error("vertex {0} is not in the graph")]
    MissingVertex(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("missing rate bucket {0}")]
    MissingBucket(String),

    #[error("malformed decomposition: {0}")]
    Structure(String),

    #[error("word is not reduced: pinch at letter {index}")]
    Pinch { index: usize },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

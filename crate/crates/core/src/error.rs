use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{value} is not a period of the base map (max deviation {deviation:e})")]
    NotAPeriod { value: String, deviation: f64 },

    #[error("singular set image overflowed")]
    UnboundedSingularSet,

    #[error("map has no singular values")]
    NoSingularValues,

    #[error("{what} = {got} exceeds limit {limit}")]
    LimitExceeded {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("semigroup has no periodic-translate structure")]
    NotStructured,

    #[error("word letter {letter} out of range for {generators} generators")]
    InvalidWord { letter: usize, generators: usize },

    #[error("pixel set is empty")]
    EmptySet,

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid config key `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("image encoding failed: {0}")]
    Image(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use std::path::PathBuf;

use thiserror::Error;

/// Every failure the analysis and generation pipelines can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot tokenize {word:?}: no inventory entry matches at character {position}")]
    TokenizationFailure { word: String, position: usize },

    #[error("invalid grapheme {0:?}: graphemes must be non-empty and contain no whitespace")]
    InvalidGrapheme(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus {0:?} has no sentences")]
    EmptyCorpus(String),

    #[error("corpus is already in logical left-to-right order")]
    WrongStorageOrder,

    #[error("stream of {len} tokens is too short for order {order}")]
    StreamTooShort { len: usize, order: usize },

    #[error("unsupported order {0}")]
    UnsupportedOrder(usize),

    #[error("transition table is empty")]
    EmptyTable,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no graphemes were classified")]
    NoGraphemes,

    #[error("corpus has no word boundaries")]
    NoTransitions,

    #[error("corpus has no words")]
    NoWords,

    #[error("lexicon needs {requested} distinct words but the slot pools only allow {available}")]
    PoolExhausted { requested: usize, available: u128 },

    #[error("learned and sequential grille tables need a source corpus")]
    MissingSource,

    #[error("plaintext contains no encodable letters")]
    EmptyPlaintext,

    #[error("no unambiguous glyph string for token {0:?} after bounded redraws")]
    NoUnambiguousAlternative(String),

    #[error("no cipher table entry for {0:?}")]
    MissingTableEntry(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the input data rather than by the caller.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_) | Error::UnsupportedOrder(_))
    }
}

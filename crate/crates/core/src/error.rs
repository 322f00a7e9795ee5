use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A malformed record in an input file. Line numbers are 1-based.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid language code {0:?}: expected two lowercase ASCII letters")]
    InvalidLanguage(String),

    #[error("empty lexicon")]
    EmptyLexicon,

    #[error("line count mismatch {0} vs {1}")]
    LineCountMismatch(usize, usize),

    #[error("undefined similarity: both sequences are empty")]
    UndefinedSimilarity,

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),

    #[error("degenerate: both similarities maximal")]
    Degenerate,

    #[error("cannot cluster an empty occurrence set")]
    EmptyOccurrences,

    #[error("word {word:?} ({lang}) has no vector")]
    Unresolvable { lang: String, word: String },

    #[error("empty candidate set")]
    NoCandidates,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("insufficient permutations: {0} (at least 1000 required)")]
    InsufficientPermutations(usize),

    #[error("need at least 3 paired observations, got {0}")]
    TooFewObservations(usize),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("correlation undefined: {0} input is constant")]
    ConstantInput(&'static str),

    #[error("missing resource: {0}")]
    MissingResource(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

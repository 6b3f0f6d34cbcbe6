use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by corpus handling, training, encoding and the overlap harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },

    #[error("invalid language code {0:?}")]
    InvalidLanguage(String),

    #[error("duplicate language code {0:?}")]
    DuplicateLanguage(String),

    #[error("language {0:?} has no documents")]
    EmptyLanguage(String),

    #[error("unknown language {0:?}")]
    UnknownLanguage(String),

    #[error("invalid word {word:?} in language {lang:?}: {reason}")]
    InvalidWord {
        lang: String,
        word: String,
        reason: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative input {0} to generalized mean")]
    NegativeInput(f64),

    #[error("overlap requires at least one high-resource language")]
    NoHighResource,

    #[error("budget {budget} is smaller than the initial character set ({alphabet})")]
    BudgetTooSmall { budget: usize, alphabet: usize },

    #[error("character {0:?} is not in the vocabulary")]
    UnknownCharacter(char),

    #[error("malformed token sequence: {0}")]
    MalformedTokens(String),

    #[error("unsupported vocabulary version {0:?}")]
    VersionMismatch(String),

    #[error("unknown vocabulary header key {0:?}")]
    UnknownHeaderKey(String),

    #[error("vocabulary line {line}: {reason}")]
    MalformedVocab { line: usize, reason: String },

    #[error("duplicate merge {left:?} {right:?} at line {line}")]
    DuplicateMerge {
        left: String,
        right: String,
        line: usize,
    },

    #[error("language mismatch between vocabulary and corpus: {0}")]
    LanguageMismatch(String),

    #[error("private use area exhausted after {0} codepoints")]
    PuaExhausted(usize),

    #[error("input already contains shift target U+{0:04X}")]
    CodepointCollision(u32),

    #[error("malformed shift spec: {0}")]
    ShiftSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

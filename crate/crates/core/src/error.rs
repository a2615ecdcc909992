use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed {what}: {message}")]
    Malformed { what: &'static str, message: String },

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("unknown value `{0}`")]
    UnknownValue(String),

    #[error("duplicate {what} `{name}`")]
    Duplicate { what: &'static str, name: String },

    #[error("foreign key {from} must reference a key attribute, `{to}` is not a key")]
    ForeignKeyNotKey { from: String, to: String },

    #[error("`{word}` on {element} is not a configured WH word")]
    UnknownWhWord { element: String, word: String },

    #[error("literal `{literal}` for numeric attribute {attribute} is not a number")]
    NonNumericLiteral { attribute: String, literal: String },

    #[error("empty phrase in lexicon entry {index}")]
    EmptyPhrase { index: usize },

    #[error("attachment line {line}: {message}")]
    Attachment { line: usize, message: String },

    #[error("question is empty after normalization")]
    EmptyQuestion,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn malformed(what: &'static str, err: impl std::fmt::Display) -> Self {
        Error::Malformed {
            what,
            message: err.to_string(),
        }
    }
}

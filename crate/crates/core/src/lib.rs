//! Translation of natural-language questions over a relational schema into SQL.
//!
//! The pipeline tokenizes a question against a hand-authored lexicon, matches
//! the resulting phrases one-to-one onto database elements, keeps only the
//! matchings whose values and attributes are properly attached, and renders
//! each surviving interpretation as SQL over every minimal join tree.
//! Questions that cannot be answered unambiguously are rejected with one of
//! five reasons (see [`matcher::Reason`]).

pub mod attachment;
pub mod error;
pub mod lexicon;
pub mod matcher;
pub mod pipeline;
pub mod schema;
pub mod sqlgen;
pub mod stem;
pub mod tokenizer;

pub use error::{Error, Result};
pub use pipeline::{translate, BatchReport, Model, TranslateOptions, TranslationOutcome};

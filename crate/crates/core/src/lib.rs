//! Directional lexical intelligibility between related languages.
//!
//! Related word pairs (cognates and borrowings) are matched in parallel
//! corpora; each pair gets a surface similarity (normalized edit distance on
//! spelling or phonemes) and a semantic similarity (aligned static vectors or
//! clustered contextual vectors), which are combined into a per-pair
//! intelligibility index and pooled into corpus-level scores for every
//! ordered (speaker, listener) language pair.

pub mod aggregate;
pub mod corpus;
pub mod dli;
pub mod error;
pub mod evaluation;
pub mod export;
pub mod lang;
pub mod lexicon;
pub mod semantics;
pub mod stem;
pub mod surface;

pub use error::{Error, Result};
pub use lang::LanguageId;

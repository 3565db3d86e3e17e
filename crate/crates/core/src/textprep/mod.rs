//! Narrative cleansing, tokenization (significant-entity and multi-word),
//! and rule-based geospatial tagging.

mod clean;
mod lexicon;
mod tagger;
mod tokenize;

pub use clean::{normalize_key, preprocess};
pub use lexicon::{load_lexicon, Lexicon, LexiconError};
pub use tagger::{tag_geospatial, TRIGGERS};
pub use tokenize::{split_words, tokenize_mwt, tokenize_st, Tag, Token};

/// A narrative as read from disk, with its cleaned text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Narrative {
    pub id: String,
    pub raw_text: String,
    pub clean_text: String,
}

impl Narrative {
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        let clean_text = preprocess(&raw_text);
        Self {
            id: id.into(),
            raw_text,
            clean_text,
        }
    }
}

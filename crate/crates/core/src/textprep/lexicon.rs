use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::normalize_key;
use super::tokenize::split_words;

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Set of multi-word place phrases used to merge words during tokenization.
/// Matching is case- and diacritics-insensitive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    /// lookup key (lowercased words joined by one space) -> display phrase
    phrases: BTreeMap<String, String>,
    max_words: usize,
    rejected_lines: usize,
}

impl Lexicon {
    /// Builds a lexicon from phrases; entries with fewer than two words are
    /// rejected and counted.
    pub fn from_phrases<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lex = Self::default();
        for phrase in phrases {
            lex.insert(phrase.as_ref());
        }
        lex
    }

    /// Adds a phrase. Returns false (and counts a rejection) when the phrase
    /// has fewer than two words.
    pub fn insert(&mut self, phrase: &str) -> bool {
        let words = split_words(phrase);
        if words.len() < 2 {
            self.rejected_lines += 1;
            return false;
        }
        let key = words
            .iter()
            .map(|w| normalize_key(w))
            .collect::<Vec<_>>()
            .join(" ");
        let display = phrase.split_whitespace().collect::<Vec<_>>().join(" ");
        self.phrases.entry(key).or_insert(display);
        self.max_words = self.max_words.max(words.len());
        true
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Lines or phrases rejected for having a single word.
    pub fn rejected_lines(&self) -> usize {
        self.rejected_lines
    }

    pub fn contains(&self, phrase: &str) -> bool {
        let key = split_words(phrase)
            .iter()
            .map(|w| normalize_key(w))
            .collect::<Vec<_>>()
            .join(" ");
        self.phrases.contains_key(&key)
    }

    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.phrases.values().map(String::as_str)
    }

    /// Word count of the longest phrase that matches a prefix of `keys`
    /// (normalized words), if any.
    pub fn longest_match(&self, keys: &[String]) -> Option<usize> {
        let upper = self.max_words.min(keys.len());
        (2..=upper)
            .rev()
            .find(|&n| self.phrases.contains_key(&keys[..n].join(" ")))
    }
}

/// Reads a lexicon file: UTF-8, one phrase per line, `#` starts a comment
/// line, blank lines ignored.
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|source| LexiconError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lex = Lexicon::default();
    for line in content.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        lex.insert(line);
    }
    if lex.rejected_lines > 0 {
        log::warn!(
            "{}: ignored {} single-word lexicon line(s)",
            path.display(),
            lex.rejected_lines
        );
    }
    Ok(lex)
}

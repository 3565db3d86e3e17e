//! Deterministic geospatial tagging used by the non-augmented baselines.

use super::tokenize::{sentence_spans, word_spans, Tag, Token};

/// Words that announce a place within the next two words.
pub const TRIGGERS: &[&str] = &[
    "from", "to", "in", "at", "via", "through", "toward", "towards", "near", "reached", "crossed",
    "left",
];

const TRIGGER_DISTANCE: usize = 2;

/// Tags every token as a geospatial candidate or other.
///
/// A token is a candidate when its first letter is uppercase and either one
/// of the two words before it (in the same sentence) is a trigger, or it opens
/// its sentence and is immediately followed by a comma. Token spans must
/// refer to `clean_text`; only the `tag` field is modified.
pub fn tag_geospatial(clean_text: &str, mut tokens: Vec<Token>) -> Vec<Token> {
    let sentences = sentence_spans(clean_text);
    for token in &mut tokens {
        let candidate = is_capitalized(&token.text)
            && sentences.get(token.sentence_index).is_some_and(|sentence| {
                let before = &clean_text[sentence.start..token.span.start.max(sentence.start)];
                let preceding = word_spans(before);
                let triggered =
                    preceding.iter().rev().take(TRIGGER_DISTANCE).any(|w| {
                        TRIGGERS.contains(&before[w.clone()].to_ascii_lowercase().as_str())
                    });
                let comma_opener =
                    preceding.is_empty() && clean_text[token.span.end..].starts_with(',');
                triggered || comma_opener
            });
        token.tag = Some(if candidate {
            Tag::GeospatialCandidate
        } else {
            Tag::Other
        });
    }
    tokens
}

fn is_capitalized(text: &str) -> bool {
    text.chars()
        .find(|c| c.is_alphabetic())
        .is_some_and(char::is_uppercase)
}

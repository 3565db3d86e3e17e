use std::ops::Range;

use super::lexicon::Lexicon;
use super::normalize_key;
use super::tagger::tag_geospatial;

/// Categorical tag attached by the rule-based geospatial tagger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    GeospatialCandidate,
    Other,
}

/// One ordered unit of narrative text, single- or multi-word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub ordinal: usize,
    pub sentence_index: usize,
    /// Byte range of the token in the cleaned text it was cut from.
    pub span: Range<usize>,
    pub tag: Option<Tag>,
}

impl Token {
    /// A token detached from any source text (empty span, untagged).
    pub fn new(text: impl Into<String>, ordinal: usize, sentence_index: usize) -> Self {
        Self {
            text: text.into(),
            ordinal,
            sentence_index,
            span: 0..0,
            tag: None,
        }
    }

    pub fn is_multi_word(&self) -> bool {
        self.text.contains(' ')
    }

    pub fn is_geospatial_candidate(&self) -> bool {
        self.tag == Some(Tag::GeospatialCandidate)
    }
}

/// Words of the form "Mr." that end in a period without ending the sentence.
const ABBREVIATIONS: &[&str] = &["mr.", "mrs.", "dr.", "st.", "u.s."];

/// Lowercase words allowed inside a capitalized entity run ("Gulf of Aden").
const CONNECTORS: &[&str] = &["of", "al", "el", "de"];

/// Capitalized function words that never start an entity run. These are
/// capitalized only because they open a sentence.
const FUNCTION_WORDS: &[&str] = &[
    "a",
    "after",
    "all",
    "an",
    "and",
    "as",
    "at",
    "before",
    "but",
    "by",
    "during",
    "eventually",
    "every",
    "finally",
    "first",
    "for",
    "from",
    "he",
    "her",
    "his",
    "i",
    "in",
    "into",
    "it",
    "its",
    "later",
    "many",
    "my",
    "near",
    "next",
    "no",
    "on",
    "once",
    "one",
    "or",
    "our",
    "she",
    "so",
    "some",
    "soon",
    "that",
    "the",
    "their",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "toward",
    "towards",
    "upon",
    "via",
    "we",
    "when",
    "while",
    "with",
    "yes",
];

pub(crate) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Byte ranges of the words in `text`. A word is a run of alphanumerics,
/// where single hyphens and apostrophes between alphanumerics are kept
/// ("Tel-Aviv", "O'Hare").
pub(crate) fn word_spans(text: &str) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut chars = text.char_indices().peekable();
    let mut start: Option<usize> = None;
    let mut last_end = 0;
    while let Some((i, c)) = chars.next() {
        if is_word_char(c) {
            if start.is_none() {
                start = Some(i);
            }
            last_end = i + c.len_utf8();
            continue;
        }
        if let Some(s) = start {
            let joins = matches!(c, '-' | '\'')
                && chars.peek().is_some_and(|&(_, next)| is_word_char(next));
            if joins {
                continue;
            }
            spans.push(s..last_end);
            start = None;
        }
    }
    if let Some(s) = start {
        spans.push(s..last_end);
    }
    spans
}

/// Splits text into sentence byte ranges on `.`, `!` and `?`.
///
/// A terminator ends a sentence only when followed by whitespace or the end
/// of the text (closing quotes and brackets attach to the sentence they
/// close). A period after one of a few fixed abbreviations is not a boundary.
pub(crate) fn sentence_spans(text: &str) -> Vec<Range<usize>> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if !matches!(b, b'.' | b'!' | b'?') {
            i += 1;
            continue;
        }
        let mut end = i + 1;
        while end < bytes.len() && matches!(bytes[end], b'.' | b'!' | b'?') {
            end += 1;
        }
        while end < bytes.len() && matches!(bytes[end], b'"' | b'\'' | b')' | b']') {
            end += 1;
        }
        let at_boundary = end == bytes.len() || bytes[end].is_ascii_whitespace();
        if at_boundary && !(b == b'.' && end == i + 1 && follows_abbreviation(text, i)) {
            push_trimmed(text, start..end, &mut spans);
            start = end;
        }
        i = end;
    }
    push_trimmed(text, start..text.len(), &mut spans);
    spans
}

fn follows_abbreviation(text: &str, period: usize) -> bool {
    let word_start = text[..period]
        .rfind(|c: char| c.is_whitespace())
        .map_or(0, |p| p + 1);
    let candidate = text[word_start..=period].to_ascii_lowercase();
    ABBREVIATIONS.contains(&candidate.as_str())
}

fn push_trimmed(text: &str, range: Range<usize>, out: &mut Vec<Range<usize>>) {
    let slice = &text[range.clone()];
    let lead = slice.len() - slice.trim_start().len();
    let trail = slice.len() - slice.trim_end().len();
    if lead + trail < slice.len() {
        out.push(range.start + lead..range.end - trail);
    }
}

/// A word located in the text together with its sentence number.
#[derive(Debug, Clone)]
pub(crate) struct LocatedWord {
    pub span: Range<usize>,
    pub sentence: usize,
}

/// Every word of `text`, sentence by sentence.
pub(crate) fn located_words(text: &str) -> Vec<Vec<LocatedWord>> {
    sentence_spans(text)
        .into_iter()
        .enumerate()
        .map(|(sentence, range)| {
            word_spans(&text[range.clone()])
                .into_iter()
                .map(|w| LocatedWord {
                    span: range.start + w.start..range.start + w.end,
                    sentence,
                })
                .collect()
        })
        .collect()
}

/// Plain word splitting of `text` (no lexicon, no sentence structure).
pub fn split_words(text: &str) -> Vec<&str> {
    word_spans(text).into_iter().map(|r| &text[r]).collect()
}

fn span_text(text: &str, span: &Range<usize>) -> String {
    text[span.clone()]
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

fn only_whitespace_between(text: &str, a: &Range<usize>, b: &Range<usize>) -> bool {
    text[a.end..b.start].chars().all(char::is_whitespace)
}

/// Significant-entity tokenization: maximal runs of capitalized words,
/// tagged by [`tag_geospatial`].
pub fn tokenize_st(clean_text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for sentence in located_words(clean_text) {
        let mut i = 0;
        while i < sentence.len() {
            let first = &clean_text[sentence[i].span.clone()];
            if !is_capitalized(first)
                || FUNCTION_WORDS.contains(&first.to_ascii_lowercase().as_str())
            {
                i += 1;
                continue;
            }
            // Extend over capitalized words, and over a connector when a
            // capitalized word follows it.
            let mut last = i;
            let mut j = i + 1;
            while j < sentence.len() {
                if !only_whitespace_between(clean_text, &sentence[j - 1].span, &sentence[j].span) {
                    break;
                }
                let word = &clean_text[sentence[j].span.clone()];
                if is_capitalized(word) {
                    last = j;
                    j += 1;
                } else if CONNECTORS.contains(&word)
                    && j + 1 < sentence.len()
                    && only_whitespace_between(clean_text, &sentence[j].span, &sentence[j + 1].span)
                    && is_capitalized(&clean_text[sentence[j + 1].span.clone()])
                {
                    j += 1;
                } else {
                    break;
                }
            }
            let span = sentence[i].span.start..sentence[last].span.end;
            tokens.push(Token {
                text: span_text(clean_text, &span),
                ordinal: tokens.len(),
                sentence_index: sentence[i].sentence,
                span,
                tag: None,
            });
            i = last + 1;
        }
    }
    tag_geospatial(clean_text, tokens)
}

/// Multi-word tokenization: sentence split, word split, then greedy
/// longest-leftmost merging of lexicon phrases. Tokens are untagged.
pub fn tokenize_mwt(clean_text: &str, lex: &Lexicon) -> Vec<Token> {
    let mut tokens = Vec::new();
    for sentence in located_words(clean_text) {
        let keys: Vec<String> = sentence
            .iter()
            .map(|w| normalize_key(&clean_text[w.span.clone()]))
            .collect();
        let mut i = 0;
        while i < sentence.len() {
            let width = lex.longest_match(&keys[i..]).unwrap_or(1);
            let span = sentence[i].span.start..sentence[i + width - 1].span.end;
            tokens.push(Token {
                text: span_text(clean_text, &span),
                ordinal: tokens.len(),
                sentence_index: sentence[i].sentence,
                span,
                tag: None,
            });
            i += width;
        }
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::preprocess;
    use proptest::prelude::*;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn words_keep_hyphens_and_apostrophes() {
        assert_eq!(
            split_words("Tel-Aviv, O'Hare -- end- 'quoted'"),
            vec!["Tel-Aviv", "O'Hare", "end", "quoted"]
        );
    }

    #[test]
    fn sentences_respect_abbreviations() {
        let text = "Mr. Smith left St. Louis. He reached the U.S. border! Then? Yes";
        let sentences: Vec<&str> = sentence_spans(text).into_iter().map(|r| &text[r]).collect();
        assert_eq!(
            sentences,
            vec![
                "Mr. Smith left St. Louis.",
                "He reached the U.S. border!",
                "Then?",
                "Yes"
            ]
        );
    }

    #[test]
    fn closing_quote_stays_with_sentence() {
        let text = "He said \"go.\" They went.";
        let sentences: Vec<&str> = sentence_spans(text).into_iter().map(|r| &text[r]).collect();
        assert_eq!(sentences, vec!["He said \"go.\"", "They went."]);
    }

    #[test]
    fn st_keeps_new_orleans_together() {
        let tokens = tokenize_st("They reached New Orleans at dawn.");
        assert!(texts(&tokens).contains(&"New Orleans"));
    }

    #[test]
    fn st_empty() {
        assert!(tokenize_st("").is_empty());
    }

    #[test]
    fn st_entities_in_order() {
        let tokens = tokenize_st("from Aleppo to Tripoli then Athens");
        assert_eq!(texts(&tokens), vec!["Aleppo", "Tripoli", "Athens"]);
        assert_eq!(
            tokens.iter().map(|t| t.ordinal).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn st_connectors_only_inside_runs() {
        let tokens = tokenize_st("They sailed the Gulf of Aden of old. Ras al Khaimah, de facto.");
        assert_eq!(texts(&tokens), vec!["Gulf of Aden", "Ras al Khaimah"]);
    }

    #[test]
    fn st_runs_stop_at_punctuation() {
        let tokens = tokenize_st("via Athens, Rome and Paris");
        assert_eq!(texts(&tokens), vec!["Athens", "Rome", "Paris"]);
    }

    #[test]
    fn st_skips_sentence_initial_function_words() {
        let tokens = tokenize_st("In Beirut they waited. The Boat sank.");
        assert_eq!(texts(&tokens), vec!["Beirut", "Boat"]);
        assert_eq!(tokens[1].sentence_index, 1);
    }

    #[test]
    fn mwt_merges_lexicon_phrase() {
        let lex = Lexicon::from_phrases(["New Orleans"]);
        let tokens = tokenize_mwt("He left New Orleans.", &lex);
        assert_eq!(texts(&tokens), vec!["He", "left", "New Orleans"]);
        assert!(tokens[2].is_multi_word());
    }

    #[test]
    fn mwt_longest_leftmost() {
        let lex = Lexicon::from_phrases(["New Orleans", "Orleans Parish"]);
        let tokens = tokenize_mwt("New Orleans Parish", &lex);
        assert_eq!(texts(&tokens), vec!["New Orleans", "Parish"]);

        let lex = Lexicon::from_phrases(["San Pedro", "San Pedro Sula"]);
        let tokens = tokenize_mwt("to San Pedro Sula", &lex);
        assert_eq!(texts(&tokens), vec!["to", "San Pedro Sula"]);
    }

    #[test]
    fn mwt_is_case_insensitive_and_does_not_cross_sentences() {
        let lex = Lexicon::from_phrases(["El Paso"]);
        let tokens = tokenize_mwt("reached el paso. El. Paso", &lex);
        assert_eq!(texts(&tokens), vec!["reached", "el paso", "El", "Paso"]);
        assert_eq!(
            tokens.iter().map(|t| t.sentence_index).collect::<Vec<_>>(),
            vec![0, 0, 1, 2]
        );
    }

    #[test]
    fn mwt_collapses_line_breaks_inside_phrases() {
        let lex = Lexicon::from_phrases(["New Orleans"]);
        let tokens = tokenize_mwt("New\nOrleans", &lex);
        assert_eq!(texts(&tokens), vec!["New Orleans"]);
    }

    #[test]
    fn mwt_empty_lexicon_is_word_split() {
        let text = "They crossed into Mexico Monday, then left.";
        let tokens = tokenize_mwt(text, &Lexicon::default());
        assert_eq!(texts(&tokens), split_words(text));
    }

    fn arb_text() -> impl Strategy<Value = String> {
        let word = prop_oneof![
            Just("New".to_string()),
            Just("Orleans".to_string()),
            Just("Parish".to_string()),
            Just("San".to_string()),
            Just("Pedro".to_string()),
            Just("Sula".to_string()),
            Just("of".to_string()),
            Just("Tel-Aviv".to_string()),
            "[A-Za-z]{1,7}",
        ];
        let sep = prop_oneof![
            Just(" "),
            Just(", "),
            Just(". "),
            Just("! "),
            Just(" - "),
            Just("\n"),
        ];
        prop::collection::vec((word, sep), 0..25).prop_map(|parts| {
            parts
                .into_iter()
                .map(|(w, s)| format!("{w}{s}"))
                .collect::<String>()
        })
    }

    proptest! {
        #[test]
        fn mwt_reconstructs_word_sequence(raw in arb_text()) {
            let text = preprocess(&raw);
            let lex = Lexicon::from_phrases(["New Orleans", "Orleans Parish", "San Pedro Sula", "San Pedro"]);
            let tokens = tokenize_mwt(&text, &lex);
            let joined = texts(&tokens).join(" ");
            prop_assert_eq!(split_words(&joined), split_words(&text));
            for (i, t) in tokens.iter().enumerate() {
                prop_assert_eq!(t.ordinal, i);
                prop_assert_eq!(t.text.trim(), t.text.as_str());
            }
        }

        #[test]
        fn mwt_without_lexicon_equals_word_split(raw in arb_text()) {
            let text = preprocess(&raw);
            let tokens = tokenize_mwt(&text, &Lexicon::default());
            prop_assert_eq!(texts(&tokens), split_words(&text));
        }

        #[test]
        fn st_entities_are_contiguous_capitalized_words(raw in arb_text()) {
            let text = preprocess(&raw);
            let words = split_words(&text);
            for token in tokenize_st(&text) {
                let entity = split_words(&token.text);
                prop_assert!(entity.iter().all(|w| is_capitalized(w) || CONNECTORS.contains(w)));
                prop_assert!(words.windows(entity.len()).any(|win| win == entity.as_slice()));
                prop_assert_eq!(&text[token.span.clone()].split_whitespace().collect::<Vec<_>>().join(" "), &token.text);
            }
        }
    }
}

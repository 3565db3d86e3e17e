//! Narrative cleansing and lookup-key folding.

/// Maps raw narrative text onto printable ASCII.
///
/// Typographic quotes, dashes and ellipses become their ASCII equivalents,
/// accented and non-Latin letters are transliterated, control characters are
/// dropped, and whitespace runs collapse to a single space (or a single
/// newline when the run contained a line break). The result is trimmed.
pub fn preprocess(raw_text: &str) -> String {
    let folded = deunicode::deunicode(raw_text);

    let mut out = String::with_capacity(folded.len());
    let mut pending_space = false;
    let mut pending_newline = false;
    for c in folded.chars() {
        if c.is_ascii_whitespace() {
            if c == '\n' || c == '\r' {
                pending_newline = true;
            } else {
                pending_space = true;
            }
            continue;
        }
        if !c.is_ascii_graphic() {
            continue;
        }
        if !out.is_empty() {
            if pending_newline {
                out.push('\n');
            } else if pending_space {
                out.push(' ');
            }
        }
        pending_space = false;
        pending_newline = false;
        out.push(c);
    }
    out
}

/// Case- and diacritics-insensitive key used for gazetteer and lexicon lookups.
pub fn normalize_key(name: &str) -> String {
    let folded = deunicode::deunicode(name);
    let mut key = String::with_capacity(folded.len());
    for word in folded.split_whitespace() {
        if !key.is_empty() {
            key.push(' ');
        }
        key.extend(word.chars().map(|c| c.to_ascii_lowercase()));
    }
    key
}

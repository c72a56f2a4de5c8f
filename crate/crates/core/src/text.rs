//! Grapheme-level text helpers: normalization, width folding and
//! sentence splitting.

use unicode_segmentation::UnicodeSegmentation;

/// Maps full-width ASCII variants (U+FF01..U+FF5E) and the ideographic
/// space to their half-width forms.
fn fold_width(c: char) -> char {
    match c {
        '\u{FF01}'..='\u{FF5E}' => char::from_u32(c as u32 - 0xFEE0).unwrap_or(c),
        '\u{3000}' => ' ',
        _ => c,
    }
}

/// Canonical comparison form of a surface string: width-folded,
/// case-folded, internal whitespace collapsed to one space, trimmed.
pub fn normalize(surface: &str) -> String {
    let mut out = String::with_capacity(surface.len());
    let mut pending_space = false;
    for c in surface.chars().map(fold_width) {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.extend(c.to_lowercase());
    }
    out
}

/// Per-grapheme variant of [`normalize`] used for dictionary matching
/// inside a sentence. Whitespace graphemes become a single space so that
/// positions stay aligned with the original grapheme sequence.
pub fn fold_grapheme(g: &str) -> String {
    if g.chars().all(char::is_whitespace) {
        return " ".to_string();
    }
    g.chars().map(fold_width).flat_map(char::to_lowercase).collect()
}

pub fn is_whitespace_grapheme(g: &str) -> bool {
    !g.is_empty() && g.chars().all(char::is_whitespace)
}

pub fn graphemes(s: &str) -> Vec<String> {
    s.graphemes(true).map(str::to_string).collect()
}

pub fn grapheme_len(s: &str) -> usize {
    s.graphemes(true).count()
}

const SENTENCE_DELIMITERS: [char; 9] = ['。', '．', '.', '!', '?', ';', '；', '\n', '\r'];

/// Splits raw text into trimmed, non-empty sentences. Delimiters are
/// dropped.
pub fn split_sentences(text: &str) -> Vec<&str> {
    text.split(|c| SENTENCE_DELIMITERS.contains(&c))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

/// Whether a line of a tab-separated input file is a comment: a `#`
/// followed by whitespace or nothing. Labels such as `#2016` are data.
pub fn is_comment_line(line: &str) -> bool {
    line.strip_prefix('#').is_some_and(|rest| rest.is_empty() || rest.starts_with(char::is_whitespace))
}

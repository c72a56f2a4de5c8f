//! Dictionary-driven entity tagging of segmented tokens.

use crate::lexicon::Lexicon;
use crate::model::TagCategory;
use crate::segmenter::Token;

pub use crate::text::normalize;

/// A token recognised as a domain term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub surface: String,
    pub category: TagCategory,
    pub sentence_id: String,
    /// Ordinal among the sentence's non-whitespace tokens.
    pub token_index: usize,
    pub canonical: String,
}

/// Emits one mention per token that hits a categorized dictionary entry,
/// in token order. Unmatched words and common words are dropped.
pub fn tag_tokens(tokens: &[Token], lexicon: &Lexicon, sentence_id: &str) -> Vec<Mention> {
    tokens
        .iter()
        .filter(|t| !t.is_whitespace())
        .enumerate()
        .filter_map(|(word_index, token)| {
            let entry = lexicon.lookup(&token.surface)?;
            if entry.category == TagCategory::None {
                return None;
            }
            let canonical = entry.canonical.clone().unwrap_or_else(|| entry.surface.clone());
            Some(Mention {
                surface: token.surface.clone(),
                category: entry.category,
                sentence_id: sentence_id.to_string(),
                token_index: word_index,
                canonical,
            })
        })
        .collect()
}

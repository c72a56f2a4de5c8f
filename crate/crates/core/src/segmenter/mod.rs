//! Word segmentation: dictionary longest-match locking followed by
//! constrained Viterbi decoding over a BMES HMM.

mod hmm;

use std::ops::Range;

use thiserror::Error;

pub use hmm::{fit_params, parse_tagged_corpus, states_for_tokens, HmmParams, State};

use crate::lexicon::Lexicon;
use crate::model::Provenance;
use crate::text::{fold_grapheme, graphemes, is_whitespace_grapheme};

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("invalid HMM parameters: {0}")]
    InvalidParams(String),
    #[error("malformed HMM parameter line {line_no}")]
    MalformedParams { line_no: usize },
    #[error("span {start}..{end} is out of bounds or overlaps another span (sentence length {len})")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },
    #[error("cannot fit HMM parameters from an empty corpus")]
    EmptyCorpus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub graphemes: Vec<String>,
    pub source: Provenance,
}

impl Sentence {
    pub fn new(id: impl Into<String>, text: &str) -> Sentence {
        let id = id.into();
        Sentence { source: Provenance::text(id.clone()), id, graphemes: graphemes(text) }
    }

    pub fn len(&self) -> usize {
        self.graphemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphemes.is_empty()
    }

    pub fn slice(&self, span: &Range<usize>) -> String {
        self.graphemes[span.clone()].concat()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub span: Range<usize>,
    /// Forced by a dictionary match.
    pub locked: bool,
}

impl Token {
    pub fn is_whitespace(&self) -> bool {
        is_whitespace_grapheme(&self.surface)
    }
}

/// Greedy left-to-right longest match of Power-dictionary surfaces.
///
/// Matching compares width- and case-folded graphemes. Common entries
/// never lock a span.
pub fn lock_spans(sentence: &Sentence, lexicon: &Lexicon) -> Vec<Range<usize>> {
    let folded: Vec<String> = sentence.graphemes.iter().map(|g| fold_grapheme(g)).collect();
    let max_len = lexicon.max_power_len();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < folded.len() {
        let longest = max_len.min(folded.len() - i);
        let hit = (1..=longest).rev().find(|&len| {
            let candidate = folded[i..i + len].concat();
            lexicon.power_entry(&candidate).is_some()
        });
        match hit {
            Some(len) => {
                spans.push(i..i + len);
                i += len;
            }
            None => i += 1,
        }
    }
    spans
}

/// Runs of whitespace outside the locked spans; each becomes its own
/// token so that whitespace always separates words.
fn whitespace_runs(sentence: &Sentence, locked: &[Range<usize>]) -> Vec<Range<usize>> {
    let mut inside = vec![false; sentence.len()];
    for span in locked {
        inside[span.clone()].iter_mut().for_each(|x| *x = true);
    }
    let mut runs = Vec::new();
    let mut start = None;
    for (i, g) in sentence.graphemes.iter().enumerate() {
        let ws = !inside[i] && is_whitespace_grapheme(g);
        match (ws, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(s..sentence.len());
    }
    runs
}

/// Per-position forced states for a set of non-overlapping spans.
pub fn span_constraints(len: usize, spans: &[Range<usize>]) -> Result<Vec<Option<State>>, SegmentError> {
    let mut forced = vec![None; len];
    for span in spans {
        let err = SegmentError::SpanOutOfBounds { start: span.start, end: span.end, len };
        if span.start >= span.end || span.end > len {
            return Err(err);
        }
        if forced[span.clone()].iter().any(Option::is_some) {
            return Err(err);
        }
        if span.len() == 1 {
            forced[span.start] = Some(State::S);
        } else {
            forced[span.start] = Some(State::B);
            for slot in &mut forced[span.start + 1..span.end - 1] {
                *slot = Some(State::M);
            }
            forced[span.end - 1] = Some(State::E);
        }
    }
    Ok(forced)
}

/// Maximum log-probability legal BMES state sequence subject to the
/// per-position constraints.
///
/// Ties prefer the earlier state (B < M < E < S) at the latest position
/// where two optimal paths differ. Scores within [`TIE_EPSILON`] count as
/// tied, so paths that are equal in exact arithmetic are not split by
/// rounding. Returns `None` only for an empty input.
pub const TIE_EPSILON: f64 = 1e-10;

pub fn decode_states(
    graphemes: &[String],
    params: &HmmParams,
    forced: &[Option<State>],
) -> Option<(Vec<State>, f64)> {
    let n = graphemes.len();
    if n == 0 {
        return None;
    }
    let allowed = |t: usize, s: State| forced[t].is_none_or(|f| f == s);

    // score[t][s] is None when no legal path reaches state s at position t.
    let mut score: Vec<[Option<f64>; 4]> = vec![[None; 4]; n];
    let mut back: Vec<[usize; 4]> = vec![[0; 4]; n];

    for s in State::ALL {
        if s.can_start() && allowed(0, s) {
            score[0][s.index()] = Some(params.initial_logp(s) + params.emission_logp(s, &graphemes[0]));
        }
    }
    for t in 1..n {
        for s in State::ALL {
            if !allowed(t, s) {
                continue;
            }
            let mut best: Option<(f64, State)> = None;
            for p in State::ALL {
                if !p.can_precede(s) {
                    continue;
                }
                let Some(prev) = score[t - 1][p.index()] else { continue };
                let cand = prev + params.transition_logp(p, s);
                if best.is_none_or(|(b, _)| cand > b + TIE_EPSILON) {
                    best = Some((cand, p));
                }
            }
            if let Some((v, p)) = best {
                score[t][s.index()] = Some(v + params.emission_logp(s, &graphemes[t]));
                back[t][s.index()] = p.index();
            }
        }
    }

    let mut end: Option<(f64, State)> = None;
    for s in State::ALL {
        if !s.can_end() {
            continue;
        }
        if let Some(v) = score[n - 1][s.index()] {
            if end.is_none_or(|(b, _)| v > b + TIE_EPSILON) {
                end = Some((v, s));
            }
        }
    }
    let (logp, last) = end?;
    let mut path = vec![last; n];
    for t in (1..n).rev() {
        path[t - 1] = State::ALL[back[t][path[t].index()]];
    }
    Some((path, logp))
}

/// Segments a sentence. Locked spans become single locked tokens and
/// whitespace runs become their own tokens; the HMM decides the rest.
pub fn viterbi(
    sentence: &Sentence,
    params: &HmmParams,
    locked: &[Range<usize>],
) -> Result<Vec<Token>, SegmentError> {
    params.validate()?;
    if sentence.is_empty() {
        return Ok(Vec::new());
    }
    // Validate the locked spans on their own first so that errors refer
    // to caller input.
    span_constraints(sentence.len(), locked)?;
    let mut spans = locked.to_vec();
    spans.extend(whitespace_runs(sentence, locked));
    let forced = span_constraints(sentence.len(), &spans)?;
    let (states, _) = decode_states(&sentence.graphemes, params, &forced)
        .expect("non-empty sentence always has a legal path");
    Ok(tokens_from_states(sentence, &states, locked))
}

fn tokens_from_states(sentence: &Sentence, states: &[State], locked: &[Range<usize>]) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start = 0;
    for (t, s) in states.iter().enumerate() {
        if s.can_end() {
            let span = start..t + 1;
            tokens.push(Token {
                surface: sentence.slice(&span),
                locked: locked.contains(&span),
                span,
            });
            start = t + 1;
        }
    }
    tokens
}

/// Dictionary locking followed by Viterbi decoding.
pub fn segment(sentence: &Sentence, lexicon: &Lexicon, params: &HmmParams) -> Result<Vec<Token>, SegmentError> {
    let locked = lock_spans(sentence, lexicon);
    viterbi(sentence, params, &locked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::LexiconEntry;
    use crate::model::TagCategory;

    fn lexicon(power: &[&str], common: &[&str]) -> Lexicon {
        let entries = power
            .iter()
            .map(|s| LexiconEntry::power(s, TagCategory::E1))
            .chain(common.iter().map(|s| LexiconEntry::common(s)));
        Lexicon::from_entries(entries).unwrap()
    }

    #[test]
    fn lock_single_match() {
        let lex = lexicon(&["transformer#1"], &[]);
        let s = Sentence::new("s", "transformer#1trips");
        assert_eq!(lock_spans(&s, &lex), vec![0..13]);
    }

    #[test]
    fn lock_nothing_without_matches() {
        let lex = lexicon(&["breaker"], &["trips"]);
        assert!(lock_spans(&Sentence::new("s", "the switch trips"), &lex).is_empty());
    }

    #[test]
    fn common_entries_never_lock() {
        let lex = lexicon(&[], &["abc"]);
        assert!(lock_spans(&Sentence::new("s", "abc"), &lex).is_empty());
    }

    #[test]
    fn lock_matches_case_and_width_insensitively() {
        let lex = lexicon(&["Transformer #1"], &[]);
        let s = Sentence::new("s", "ＴＲＡＮＳＦＯＲＭＥＲ #1 trips");
        assert_eq!(lock_spans(&s, &lex), vec![0..14]);
    }

    /// All maximal sets of non-overlapping dictionary matches.
    fn maximal_matchings(s: &Sentence, surfaces: &[&str]) -> Vec<Vec<Range<usize>>> {
        let folded: Vec<String> = s.graphemes.iter().map(|g| fold_grapheme(g)).collect();
        let mut matches = Vec::new();
        for i in 0..folded.len() {
            for j in i + 1..=folded.len() {
                if surfaces.contains(&folded[i..j].concat().as_str()) {
                    matches.push(i..j);
                }
            }
        }
        let overlaps = |a: &Range<usize>, b: &Range<usize>| a.start < b.end && b.start < a.end;
        let mut out = Vec::new();
        for mask in 0u32..(1 << matches.len()) {
            let set: Vec<Range<usize>> =
                (0..matches.len()).filter(|k| mask & (1 << k) != 0).map(|k| matches[k].clone()).collect();
            let disjoint = set.iter().enumerate().all(|(a, x)| set[a + 1..].iter().all(|y| !overlaps(x, y)));
            let maximal = matches.iter().all(|m| set.contains(m) || set.iter().any(|x| overlaps(x, m)));
            if disjoint && maximal {
                out.push(set);
            }
        }
        out
    }

    #[test]
    fn longest_match_wins_among_maximal_matchings() {
        let surfaces = ["ab", "abc", "cd", "d"];
        let lex = lexicon(&surfaces, &[]);
        let s = Sentence::new("s", "abcd");
        let greedy = lock_spans(&s, &lex);
        let all = maximal_matchings(&s, &surfaces);
        assert!(all.contains(&greedy), "greedy {greedy:?} not among {all:?}");
        // Among maximal matchings, greedy picks the one whose first span
        // starts earliest and is longest.
        let mut ranked = all.clone();
        ranked.sort_by_key(|set| set.iter().map(|r| (r.start, usize::MAX - r.end)).collect::<Vec<_>>());
        assert_eq!(greedy, ranked[0]);
        assert_eq!(greedy, vec![0..3, 3..4]);
    }

    #[test]
    fn single_grapheme_sentence_is_single_token() {
        let s = Sentence::new("s", "a");
        let tokens = viterbi(&s, &HmmParams::uniform(), &[]).unwrap();
        assert_eq!(tokens, vec![Token { surface: "a".into(), span: 0..1, locked: false }]);
    }

    #[test]
    fn fully_locked_sentence_is_one_token() {
        let s = Sentence::new("s", "abcd");
        let forced = span_constraints(4, &[0..4]).unwrap();
        let (states, _) = decode_states(&s.graphemes, &HmmParams::uniform(), &forced).unwrap();
        assert_eq!(states, vec![State::B, State::M, State::M, State::E]);
        let tokens = viterbi(&s, &HmmParams::uniform(), &[0..4]).unwrap();
        assert_eq!(tokens.len(), 1);
        assert!(tokens[0].locked);
    }

    #[test]
    fn out_of_bounds_span_rejected() {
        let s = Sentence::new("s", "abc");
        assert!(matches!(
            viterbi(&s, &HmmParams::uniform(), &[1..4]),
            Err(SegmentError::SpanOutOfBounds { .. })
        ));
        assert!(matches!(
            viterbi(&s, &HmmParams::uniform(), &[0..2, 1..3]),
            Err(SegmentError::SpanOutOfBounds { .. })
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = HmmParams::uniform();
        p.transition[0][0] = -1.0;
        assert!(matches!(
            viterbi(&Sentence::new("s", "ab"), &p, &[]),
            Err(SegmentError::InvalidParams(_))
        ));
    }

    #[test]
    fn whitespace_forces_boundaries() {
        let lex = lexicon(&["transformer #1", "connects"], &[]);
        let s = Sentence::new("s", "transformer #1 connects  switch");
        let tokens = segment(&s, &lex, &HmmParams::uniform()).unwrap();
        let surfaces: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(&surfaces[..4], &["transformer #1", " ", "connects", "  "]);
        assert!(tokens[0].locked && tokens[2].locked);
        assert!(!tokens[1].locked);
        assert_eq!(surfaces[4..].concat(), "switch");
    }

    #[test]
    fn locked_spans_become_locked_tokens() {
        let lex = lexicon(&["主变压器", "跳闸"], &[]);
        let p = fit_params(&[vec!["今天", "主变压器", "跳闸", "了"]]).unwrap();
        let s = Sentence::new("s", "今天主变压器跳闸了");
        let tokens = segment(&s, &lex, &p).unwrap();
        let locked: Vec<&str> = tokens.iter().filter(|t| t.locked).map(|t| t.surface.as_str()).collect();
        assert_eq!(locked, vec!["主变压器", "跳闸"]);
        assert_eq!(tokens.iter().map(|t| t.surface.as_str()).collect::<String>(), "今天主变压器跳闸了");
    }

    #[test]
    fn empty_sentence_has_no_tokens() {
        let s = Sentence::new("s", "");
        assert!(viterbi(&s, &HmmParams::uniform(), &[]).unwrap().is_empty());
    }
}

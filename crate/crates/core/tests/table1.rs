//! Relation classification on a hand-labelled 20-sentence corpus.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use powerkg_core::lexicon::{load_lexicon, Lexicon, Source};
use powerkg_core::pipeline::{load_hmm, HmmSource};
use powerkg_core::relation::extract_relations;
use powerkg_core::segmenter::{segment, Sentence};
use powerkg_core::entity::tag_tokens;
use powerkg_core::text::split_sentences;

type Key = (String, String, String);

fn fixtures() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

fn expected() -> BTreeMap<usize, Vec<Key>> {
    let text = fs::read_to_string(fixtures().join("table1/expected.tsv")).unwrap();
    let mut out: BTreeMap<usize, Vec<Key>> = BTreeMap::new();
    for line in text.lines().filter(|l| !l.starts_with("# ") && !l.is_empty()) {
        let cols: Vec<&str> = line.split('\t').collect();
        out.entry(cols[0].parse().unwrap()).or_default().push((cols[1].into(), cols[2].into(), cols[3].into()));
    }
    out
}

#[test]
fn golden_corpus_extracts_expected_triples() {
    let f = fixtures();
    let lexicon = Lexicon::new(
        load_lexicon(&f.join("table1/common.tsv"), Source::Common).unwrap(),
        load_lexicon(&f.join("table1/power.tsv"), Source::Power).unwrap(),
    )
    .unwrap();
    let params = load_hmm(&HmmSource::Train(f.join("hmm/tagged.txt"))).unwrap();
    let corpus = fs::read_to_string(f.join("table1/corpus.txt")).unwrap();
    let sentences = split_sentences(&corpus);
    assert_eq!(sentences.len(), 20);
    let want = expected();
    for (i, text) in sentences.iter().enumerate() {
        let n = i + 1;
        let id = format!("corpus.txt#{n}");
        let s = Sentence::new(id.clone(), text);
        let tokens = segment(&s, &lexicon, &params).unwrap();
        let mentions = tag_tokens(&tokens, &lexicon, &id);
        let mut got: Vec<Key> = extract_relations(&mentions)
            .into_iter()
            .map(|t| (t.subject.label, t.predicate.name, t.object.label))
            .collect();
        got.sort();
        let mut exp = want.get(&n).cloned().unwrap_or_default();
        exp.sort();
        assert_eq!(got, exp, "sentence {n}: {text}");
    }
}

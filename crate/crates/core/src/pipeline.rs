//! End-to-end build: text extraction, structured conversion, fusion and
//! loading into a [`GraphStore`].

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::entity::tag_tokens;
use crate::fusion::{filter_redundant, fold_coreferences, structured_to_triples, FusionError, StationDocument};
use crate::lexicon::{load_lexicon, Lexicon, LexiconError, Source};
use crate::model::{Category, TagCategory};
use crate::query::{saturate, RuleError, RuleSet};
use crate::relation::{extract_relations, CandidateTriple};
use crate::segmenter::{fit_params, parse_tagged_corpus, segment, HmmParams, SegmentError, Sentence};
use crate::store::{EntityId, GraphStore, StoreError};
use crate::text::split_sentences;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("nothing to build: supply at least one corpus or structured document")]
    NoInputs,
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("{path}: {source}")]
    Segment { path: PathBuf, source: SegmentError },
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{path}: {source}")]
    Rule { path: PathBuf, source: RuleError },
    #[error("failed to read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HmmSource {
    /// A parameter file.
    Params(PathBuf),
    /// A tagged corpus to fit parameters from.
    Train(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildConfig {
    pub common: PathBuf,
    pub power: PathBuf,
    pub hmm: HmmSource,
    pub corpus: Vec<PathBuf>,
    pub structured: Vec<PathBuf>,
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub sentences: usize,
    pub tokens: usize,
    pub mentions: BTreeMap<TagCategory, usize>,
    pub candidate_triples: usize,
    pub filtered_triples: usize,
    pub entities: usize,
    /// Entities of the equipment category.
    pub equipment: usize,
    /// Triples the rule set would add at query time; never saved.
    pub derivable: usize,
}

impl fmt::Display for BuildReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sentences\t{}", self.sentences)?;
        writeln!(f, "tokens\t{}", self.tokens)?;
        for (cat, n) in &self.mentions {
            writeln!(f, "mentions {cat}\t{n}")?;
        }
        writeln!(f, "candidate triples\t{}", self.candidate_triples)?;
        writeln!(f, "post-filter triples\t{}", self.filtered_triples)?;
        writeln!(f, "entities\t{}", self.entities)?;
        writeln!(f, "equipment\t{}", self.equipment)?;
        write!(f, "derivable\t{}", self.derivable)
    }
}

#[derive(Debug, Clone)]
pub struct Built {
    pub store: GraphStore,
    pub report: BuildReport,
}

/// A text document: a source name (used in sentence ids) and its content.
#[derive(Debug, Clone)]
pub struct TextDoc {
    pub name: String,
    pub text: String,
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| PipelineError::Io { path: path.to_path_buf(), source: e })
}

pub fn load_hmm(source: &HmmSource) -> Result<HmmParams, PipelineError> {
    let (path, parsed) = match source {
        HmmSource::Params(path) => (path, HmmParams::from_text(&read(path)?)),
        HmmSource::Train(path) => (path, fit_params(&parse_tagged_corpus(&read(path)?))),
    };
    let params = parsed.map_err(|e| PipelineError::Segment { path: path.clone(), source: e })?;
    params.validate().map_err(|e| PipelineError::Segment { path: path.clone(), source: e })?;
    Ok(params)
}

pub fn load_rules(path: Option<&Path>) -> Result<RuleSet, PipelineError> {
    match path {
        None => Ok(RuleSet::default_rules()),
        Some(p) => RuleSet::parse(&read(p)?).map_err(|e| PipelineError::Rule { path: p.to_path_buf(), source: e }),
    }
}

/// Reads every input named by `config` and builds the graph.
pub fn build(config: &BuildConfig) -> Result<Built, PipelineError> {
    if config.corpus.is_empty() && config.structured.is_empty() {
        return Err(PipelineError::NoInputs);
    }
    let lexicon = Lexicon::new(load_lexicon(&config.common, Source::Common)?, load_lexicon(&config.power, Source::Power)?)?;
    let params = load_hmm(&config.hmm)?;
    let texts = config
        .corpus
        .iter()
        .map(|p| Ok(TextDoc { name: file_name(p), text: read(p)? }))
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let docs = config
        .structured
        .iter()
        .map(|p| Ok((file_name(p), StationDocument::load(p)?)))
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let rules = load_rules(config.rules.as_deref())?;
    build_from(&lexicon, &params, &texts, &docs, &rules).map_err(|e| match e {
        PipelineError::Rule { source, .. } => PipelineError::Rule { path: config.rules.clone().unwrap_or_default(), source },
        other => other,
    })
}

/// Builds from in-memory inputs. Sentence ids are `<doc name>#<n>`,
/// counting from 1 within each document.
pub fn build_from(
    lexicon: &Lexicon,
    params: &HmmParams,
    texts: &[TextDoc],
    docs: &[(String, StationDocument)],
    rules: &RuleSet,
) -> Result<Built, PipelineError> {
    let mut report = BuildReport::default();
    let mut candidates: Vec<CandidateTriple> = Vec::new();
    for doc in texts {
        for (n, text) in split_sentences(&doc.text).iter().enumerate() {
            let id = format!("{}#{}", doc.name, n + 1);
            let sentence = Sentence::new(id.clone(), text);
            let tokens = segment(&sentence, lexicon, params)
                .map_err(|e| PipelineError::Segment { path: PathBuf::from(&doc.name), source: e })?;
            report.sentences += 1;
            report.tokens += tokens.iter().filter(|t| !t.is_whitespace()).count();
            let mentions = tag_tokens(&tokens, lexicon, &id);
            for m in &mentions {
                *report.mentions.entry(m.category).or_default() += 1;
            }
            candidates.extend(extract_relations(&mentions));
        }
    }
    for (name, doc) in docs {
        candidates.extend(structured_to_triples(doc, name)?);
    }
    report.candidate_triples = candidates.len();

    let folded = fold_coreferences(&candidates, lexicon)?;
    let triples = filter_redundant(&folded.triples);
    report.filtered_triples = triples.len();

    let mut store = GraphStore::new();
    for t in &triples {
        store.insert(t)?;
    }
    for (label, variants) in &folded.aliases {
        if let Some(id) = store.entity_by_label(label) {
            for v in variants.iter().filter(|v| !v.contains(',')) {
                store.add_alias(id, v)?;
            }
        }
    }
    let labels: Vec<(EntityId, String)> =
        store.entities().iter().map(|e| (e.id, e.label.clone())).collect();
    for (id, label) in labels {
        for alias in lexicon.aliases_of(&label) {
            if alias != label && !alias.contains(',') {
                store.add_alias(id, alias)?;
            }
        }
    }
    report.entities = store.entity_count();
    report.equipment = store.entities().iter().filter(|e| e.category == Category::E1).count();
    report.derivable = saturate(&store, rules)
        .map_err(|e| PipelineError::Rule { path: PathBuf::new(), source: e })?
        .len();
    Ok(Built { store, report })
}

//! The common-words dictionary and the electric-power dictionary.
//!
//! Both are tab-separated UTF-8 files with one entry per line:
//!
//! ```text
//! surface<TAB>category<TAB>canonical?<TAB>comment?
//! ```
//!
//! The category token is one of `E1 E2 E3 R1 R2 R3 P -`. An empty or
//! missing canonical column makes the entry its own canonical form. Blank
//! lines and lines starting with `#` plus whitespace are ignored, so
//! labels like `#2016` remain usable. Entries are keyed by
//! their normalized surface, so lookups are case- and width-insensitive.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::TagCategory;
use crate::text::{grapheme_len, is_comment_line, normalize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Common,
    Power,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LexiconEntry {
    pub surface: String,
    pub source: Source,
    pub category: TagCategory,
    /// Alias target; `None` means the entry is its own canonical form.
    pub canonical: Option<String>,
}

impl LexiconEntry {
    pub fn power(surface: &str, category: TagCategory) -> Self {
        LexiconEntry { surface: surface.to_string(), source: Source::Power, category, canonical: None }
    }

    pub fn alias(surface: &str, category: TagCategory, canonical: &str) -> Self {
        LexiconEntry {
            surface: surface.to_string(),
            source: Source::Power,
            category,
            canonical: Some(canonical.to_string()),
        }
    }

    pub fn common(surface: &str) -> Self {
        LexiconEntry {
            surface: surface.to_string(),
            source: Source::Common,
            category: TagCategory::None,
            canonical: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{path}: malformed line {line_no}: {reason}")]
    MalformedLine { path: PathBuf, line_no: usize, reason: String },
    #[error("duplicate surface {0:?}")]
    DuplicateSurface(String),
    #[error("entry {surface:?} refers to unknown or unusable canonical {canonical:?}")]
    DanglingCanonical { surface: String, canonical: String },
    #[error("failed to read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Entries parsed from one dictionary file, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexiconFragment {
    pub source: Option<Source>,
    pub entries: Vec<LexiconEntry>,
}

pub fn load_lexicon(path: &Path, source: Source) -> Result<LexiconFragment, LexiconError> {
    let text = fs::read_to_string(path)
        .map_err(|e| LexiconError::Io { path: path.to_path_buf(), source: e })?;
    parse_lexicon(&text, source).map_err(|e| match e {
        LexiconError::MalformedLine { line_no, reason, .. } => {
            LexiconError::MalformedLine { path: path.to_path_buf(), line_no, reason }
        }
        other => other,
    })
}

pub fn parse_lexicon(text: &str, source: Source) -> Result<LexiconFragment, LexiconError> {
    let mut entries = Vec::new();
    let mut seen = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || is_comment_line(line) {
            continue;
        }
        let malformed = |reason: &str| LexiconError::MalformedLine {
            path: PathBuf::new(),
            line_no,
            reason: reason.to_string(),
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 || cols.len() > 4 {
            return Err(malformed("expected 2 to 4 tab-separated columns"));
        }
        let surface = cols[0].trim();
        if surface.is_empty() {
            return Err(malformed("empty surface"));
        }
        let category: TagCategory =
            cols[1].trim().parse().map_err(|_| malformed("unknown category token"))?;
        if source == Source::Common && category != TagCategory::None {
            return Err(malformed("common-words entries cannot carry a category"));
        }
        let canonical = cols.get(2).map(|c| c.trim()).filter(|c| !c.is_empty() && *c != surface);
        if seen.insert(normalize(surface), ()).is_some() {
            return Err(LexiconError::DuplicateSurface(surface.to_string()));
        }
        entries.push(LexiconEntry {
            surface: surface.to_string(),
            source,
            category,
            canonical: canonical.map(str::to_string),
        });
    }
    Ok(LexiconFragment { source: Some(source), entries })
}

/// Serializes entries in the dictionary file format.
pub fn format_lexicon(entries: &[LexiconEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&e.surface);
        out.push('\t');
        out.push_str(e.category.token());
        if let Some(c) = &e.canonical {
            out.push('\t');
            out.push_str(c);
        }
        out.push('\n');
    }
    out
}

/// Both dictionaries, indexed by normalized surface.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    common: HashMap<String, LexiconEntry>,
    power: HashMap<String, LexiconEntry>,
    max_surface_len: usize,
    max_power_len: usize,
}

impl Lexicon {
    /// Assembles a lexicon, checking that every alias points at a Power
    /// entry that has a category and is itself canonical.
    pub fn new(common: LexiconFragment, power: LexiconFragment) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::default();
        for e in common.entries {
            lex.insert(e)?;
        }
        for e in power.entries {
            lex.insert(e)?;
        }
        let all = lex.common.values().chain(lex.power.values());
        for e in all {
            if let Some(target) = &e.canonical {
                let ok = lex.power.get(&normalize(target)).is_some_and(|t| {
                    t.category != TagCategory::None && t.canonical.is_none()
                });
                if !ok {
                    return Err(LexiconError::DanglingCanonical {
                        surface: e.surface.clone(),
                        canonical: target.clone(),
                    });
                }
            }
        }
        Ok(lex)
    }

    pub fn from_entries(entries: impl IntoIterator<Item = LexiconEntry>) -> Result<Lexicon, LexiconError> {
        let (power, common): (Vec<_>, Vec<_>) =
            entries.into_iter().partition(|e| e.source == Source::Power);
        Lexicon::new(
            LexiconFragment { source: Some(Source::Common), entries: common },
            LexiconFragment { source: Some(Source::Power), entries: power },
        )
    }

    fn insert(&mut self, entry: LexiconEntry) -> Result<(), LexiconError> {
        let len = grapheme_len(&entry.surface);
        let map = match entry.source {
            Source::Common => &mut self.common,
            Source::Power => {
                self.max_power_len = self.max_power_len.max(len);
                &mut self.power
            }
        };
        let key = normalize(&entry.surface);
        if map.contains_key(&key) {
            return Err(LexiconError::DuplicateSurface(entry.surface));
        }
        map.insert(key, entry);
        self.max_surface_len = self.max_surface_len.max(len);
        Ok(())
    }

    /// Power entries shadow Common entries with the same surface.
    pub fn lookup(&self, surface: &str) -> Option<&LexiconEntry> {
        let key = normalize(surface);
        self.power.get(&key).or_else(|| self.common.get(&key))
    }

    /// Lookup against Power entries only, by an already-normalized key.
    pub fn power_entry(&self, normalized: &str) -> Option<&LexiconEntry> {
        self.power.get(normalized)
    }

    /// Canonical label for a surface: the alias target or the entry's own
    /// surface when it is a dictionary term, `None` otherwise.
    pub fn canonical_of(&self, surface: &str) -> Option<&str> {
        let entry = self.lookup(surface)?;
        if entry.category == TagCategory::None {
            return None;
        }
        Some(entry.canonical.as_deref().unwrap_or(&entry.surface))
    }

    /// Surfaces of every Power entry aliased to `canonical`.
    pub fn aliases_of(&self, canonical: &str) -> Vec<&str> {
        let key = normalize(canonical);
        let mut out: Vec<&str> = self
            .power
            .values()
            .filter(|e| e.canonical.as_deref().is_some_and(|c| normalize(c) == key))
            .map(|e| e.surface.as_str())
            .collect();
        out.sort_unstable();
        out
    }

    pub fn max_surface_len(&self) -> usize {
        self.max_surface_len
    }

    pub fn max_power_len(&self) -> usize {
        self.max_power_len
    }

    pub fn len(&self) -> usize {
        self.common.len() + self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries of one source sorted by surface.
    pub fn entries(&self, source: Source) -> Vec<&LexiconEntry> {
        let map = match source {
            Source::Common => &self.common,
            Source::Power => &self.power,
        };
        let mut v: Vec<_> = map.values().collect();
        v.sort_by(|a, b| a.surface.cmp(&b.surface));
        v
    }
}

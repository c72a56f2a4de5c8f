//! BMES segmentation HMM parameters, maximum-likelihood fitting and the
//! sectioned text serialization.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use super::SegmentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    B,
    M,
    E,
    S,
}

impl State {
    pub const ALL: [State; 4] = [State::B, State::M, State::E, State::S];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn token(self) -> &'static str {
        match self {
            State::B => "B",
            State::M => "M",
            State::E => "E",
            State::S => "S",
        }
    }

    /// Whether `self -> next` is allowed by the BMES word structure.
    pub fn can_precede(self, next: State) -> bool {
        use State::*;
        matches!(
            (self, next),
            (B, M) | (B, E) | (M, M) | (M, E) | (E, B) | (E, S) | (S, B) | (S, S)
        )
    }

    pub fn can_start(self) -> bool {
        matches!(self, State::B | State::S)
    }

    pub fn can_end(self) -> bool {
        matches!(self, State::E | State::S)
    }
}

impl FromStr for State {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        State::ALL.into_iter().find(|st| st.token() == s).ok_or(())
    }
}

const SUM_TOLERANCE: f64 = 1e-9;

/// Log-probability tables of the segmentation HMM.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmParams {
    pub initial: [f64; 4],
    pub transition: [[f64; 4]; 4],
    pub emission: [HashMap<String, f64>; 4],
    pub unseen_emission_logp: f64,
}

impl HmmParams {
    pub fn emission_logp(&self, state: State, grapheme: &str) -> f64 {
        self.emission[state.index()].get(grapheme).copied().unwrap_or(self.unseen_emission_logp)
    }

    pub fn transition_logp(&self, from: State, to: State) -> f64 {
        self.transition[from.index()][to.index()]
    }

    pub fn initial_logp(&self, state: State) -> f64 {
        self.initial[state.index()]
    }

    /// Uniform distribution over legal starts and transitions with flat
    /// emissions.
    pub fn uniform() -> HmmParams {
        let half = 0.5f64.ln();
        let mut initial = [f64::NEG_INFINITY; 4];
        initial[State::B.index()] = half;
        initial[State::S.index()] = half;
        let mut transition = [[f64::NEG_INFINITY; 4]; 4];
        for from in State::ALL {
            for to in State::ALL {
                if from.can_precede(to) {
                    transition[from.index()][to.index()] = half;
                }
            }
        }
        HmmParams {
            initial,
            transition,
            emission: Default::default(),
            unseen_emission_logp: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SegmentError> {
        let bad = |msg: String| Err(SegmentError::InvalidParams(msg));
        let all_values = self
            .initial
            .iter()
            .chain(self.transition.iter().flatten())
            .chain(self.emission.iter().flat_map(|m| m.values()))
            .chain(std::iter::once(&self.unseen_emission_logp));
        for v in all_values {
            if v.is_nan() || *v == f64::INFINITY || *v > 0.0 {
                return bad(format!("log-probability {v} out of range"));
            }
        }
        if self.unseen_emission_logp == f64::NEG_INFINITY {
            return bad("unseen emission log-probability must be finite".into());
        }
        for s in [State::M, State::E] {
            if self.initial_logp(s) != f64::NEG_INFINITY {
                return bad(format!("initial[{}] must be -inf", s.token()));
            }
        }
        let total: f64 = self.initial.iter().map(|v| v.exp()).sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return bad(format!("initial probabilities sum to {total}"));
        }
        for from in State::ALL {
            for to in State::ALL {
                if !from.can_precede(to) && self.transition_logp(from, to) != f64::NEG_INFINITY {
                    return bad(format!("illegal transition {}->{} must be -inf", from.token(), to.token()));
                }
            }
            let row: f64 = self.transition[from.index()].iter().map(|v| v.exp()).sum();
            if (row - 1.0).abs() > SUM_TOLERANCE {
                return bad(format!("transition row {} sums to {row}", from.token()));
            }
        }
        Ok(())
    }

    /// Serializes into `[initial]`, `[transition]`, `[emission]` and
    /// `[unseen]` sections with tab-separated entries. Output is sorted so
    /// equal parameters always produce identical text.
    pub fn to_text(&self) -> String {
        let mut out = String::from("[initial]\n");
        for s in State::ALL {
            let _ = writeln!(out, "{}\t{}", s.token(), self.initial_logp(s));
        }
        out.push_str("[transition]\n");
        for from in State::ALL {
            for to in State::ALL {
                let _ = writeln!(out, "{}\t{}\t{}", from.token(), to.token(), self.transition_logp(from, to));
            }
        }
        out.push_str("[emission]\n");
        for s in State::ALL {
            let sorted: BTreeMap<_, _> = self.emission[s.index()].iter().collect();
            for (g, v) in sorted {
                let _ = writeln!(out, "{}\t{}\t{}", s.token(), g, v);
            }
        }
        let _ = writeln!(out, "[unseen]\n{}", self.unseen_emission_logp);
        out
    }

    pub fn from_text(text: &str) -> Result<HmmParams, SegmentError> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Initial,
            Transition,
            Emission,
            Unseen,
        }
        let mut params = HmmParams {
            initial: [f64::NEG_INFINITY; 4],
            transition: [[f64::NEG_INFINITY; 4]; 4],
            emission: Default::default(),
            unseen_emission_logp: f64::NEG_INFINITY,
        };
        let mut section = Section::None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            let malformed = || SegmentError::MalformedParams { line_no };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            section = match line {
                "[initial]" => Section::Initial,
                "[transition]" => Section::Transition,
                "[emission]" => Section::Emission,
                "[unseen]" => Section::Unseen,
                _ => {
                    let cols: Vec<&str> = line.split('\t').collect();
                    let value = |s: &str| s.trim().parse::<f64>().map_err(|_| malformed());
                    let state = |s: &str| s.parse::<State>().map_err(|_| malformed());
                    match (&section, cols.as_slice()) {
                        (Section::Initial, [s, v]) => params.initial[state(s)?.index()] = value(v)?,
                        (Section::Transition, [a, b, v]) => {
                            params.transition[state(a)?.index()][state(b)?.index()] = value(v)?
                        }
                        (Section::Emission, [s, g, v]) => {
                            params.emission[state(s)?.index()].insert((*g).to_string(), value(v)?);
                        }
                        (Section::Unseen, [v]) => params.unseen_emission_logp = value(v)?,
                        _ => return Err(malformed()),
                    }
                    continue;
                }
            };
        }
        params.validate()?;
        Ok(params)
    }
}

/// BMES labels for a gold segmentation.
pub fn states_for_tokens<S: AsRef<str>>(token_lengths: &[S]) -> Vec<State> {
    let mut out = Vec::new();
    for tok in token_lengths {
        let n = crate::text::grapheme_len(tok.as_ref());
        match n {
            0 => {}
            1 => out.push(State::S),
            _ => {
                out.push(State::B);
                out.extend(std::iter::repeat_n(State::M, n - 2));
                out.push(State::E);
            }
        }
    }
    out
}

/// Maximum-likelihood estimate from gold segmentations.
///
/// Initial and transition tables use raw relative frequencies; a
/// transition row with no observations falls back to uniform over its
/// legal successors. Emissions use add-one smoothing over the corpus
/// grapheme vocabulary, and the unseen log-probability is the smallest
/// smoothed value any state assigns.
pub fn fit_params<S: AsRef<str>>(corpus: &[Vec<S>]) -> Result<HmmParams, SegmentError> {
    let mut initial = [0u64; 4];
    let mut transition = [[0u64; 4]; 4];
    let mut emission: [HashMap<String, u64>; 4] = Default::default();
    let mut vocab = BTreeSet::new();
    let mut sentences = 0usize;

    for tokens in corpus {
        let graphemes: Vec<String> =
            tokens.iter().flat_map(|t| crate::text::graphemes(t.as_ref())).collect();
        let states = states_for_tokens(tokens);
        if states.is_empty() {
            continue;
        }
        sentences += 1;
        initial[states[0].index()] += 1;
        for w in states.windows(2) {
            transition[w[0].index()][w[1].index()] += 1;
        }
        for (g, s) in graphemes.iter().zip(&states) {
            // Tabs and line breaks cannot be represented in the parameter file.
            if g.contains(['\t', '\n', '\r']) {
                continue;
            }
            *emission[s.index()].entry(g.clone()).or_default() += 1;
            vocab.insert(g.clone());
        }
    }
    if sentences == 0 {
        return Err(SegmentError::EmptyCorpus);
    }

    let log_ratio = |num: u64, den: u64| {
        if num == 0 {
            f64::NEG_INFINITY
        } else {
            (num as f64 / den as f64).ln()
        }
    };

    let init_total: u64 = initial.iter().sum();
    let mut params = HmmParams {
        initial: initial.map(|c| log_ratio(c, init_total)),
        transition: [[f64::NEG_INFINITY; 4]; 4],
        emission: Default::default(),
        unseen_emission_logp: 0.0,
    };
    for from in State::ALL {
        let row = transition[from.index()];
        let total: u64 = row.iter().sum();
        let legal: Vec<State> = State::ALL.into_iter().filter(|&to| from.can_precede(to)).collect();
        for to in State::ALL {
            params.transition[from.index()][to.index()] = if !from.can_precede(to) {
                f64::NEG_INFINITY
            } else if total == 0 {
                (1.0 / legal.len() as f64).ln()
            } else {
                log_ratio(row[to.index()], total)
            };
        }
    }

    let v = vocab.len() as u64;
    let mut floor = 0.0f64;
    for s in State::ALL {
        let counts = &emission[s.index()];
        let total: u64 = counts.values().sum();
        let denom = (total + v).max(1) as f64;
        for g in &vocab {
            let c = counts.get(g).copied().unwrap_or(0);
            params.emission[s.index()].insert(g.clone(), ((c + 1) as f64 / denom).ln());
        }
        floor = floor.min((1.0 / denom).ln());
    }
    params.unseen_emission_logp = floor;
    params.validate()?;
    Ok(params)
}

/// Parses a tagged corpus: one sentence per line, gold tokens separated
/// by TAB, the concatenation of the tokens being the sentence.
pub fn parse_tagged_corpus(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .filter(|l| !l.is_empty() && !crate::text::is_comment_line(l))
        .map(|l| l.split('\t').filter(|t| !t.is_empty()).map(str::to_string).collect())
        .collect()
}

//! Horn rules over triple patterns and forward chaining to a fixpoint.
//!
//! Rule file syntax, one rule per line:
//!
//! ```text
//! belongto-trans: (?a,BelongTo,?b) & (?b,BelongTo,?c) => (?a,BelongTo,?c)
//! ```
//!
//! Terms starting with `?` are variables, anything else is an entity
//! label. Predicates are always names. Every conclusion variable must be
//! bound by a premise, so rules never invent entities and saturation
//! always terminates.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::model::{Predicate, Provenance};
use crate::store::{EntityId, GraphStore, StoreError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceRule {
    pub name: String,
    pub premises: Vec<Pattern>,
    pub conclusion: Pattern,
}

impl fmt::Display for InferenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let premises: Vec<String> = self.premises.iter().map(Pattern::to_string).collect();
        write!(f, "{}: {} => {}", self.name, premises.join(" & "), self.conclusion)
    }
}

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("malformed rule on line {line_no}: {reason}")]
    Malformed { line_no: usize, reason: String },
    #[error("rule {rule}: conclusion variable ?{var} is not bound by any premise")]
    UnboundVariable { rule: String, var: String },
    #[error("rule {rule}: conclusion names unknown entity {label:?}")]
    UnknownConstant { rule: String, label: String },
    #[error("duplicate rule name {0}")]
    DuplicateName(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<InferenceRule>,
}

pub const DEFAULT_RULES: &str = "belongto-trans: (?a,BelongTo,?b) & (?b,BelongTo,?c) => (?a,BelongTo,?c)\n";

fn parse_term(raw: &str) -> Result<Term, String> {
    let raw = raw.trim();
    match raw.strip_prefix('?') {
        Some("") => Err("empty variable name".into()),
        Some(v) => Ok(Term::Var(v.to_string())),
        None if raw.is_empty() => Err("empty term".into()),
        None => Ok(Term::Const(raw.to_string())),
    }
}

fn parse_pattern(raw: &str) -> Result<Pattern, String> {
    let inner = raw
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| format!("pattern {raw:?} must be parenthesized"))?;
    let parts: Vec<&str> = inner.split(',').collect();
    let [s, p, o] = parts.as_slice() else {
        return Err(format!("pattern {raw:?} needs three comma-separated terms"));
    };
    let predicate = p.trim();
    if predicate.is_empty() || predicate.starts_with('?') {
        return Err("predicates must be names".into());
    }
    Ok(Pattern { subject: parse_term(s)?, predicate: predicate.to_string(), object: parse_term(o)? })
}

impl InferenceRule {
    fn check(&self) -> Result<(), RuleError> {
        let bound: HashSet<&str> = self
            .premises
            .iter()
            .flat_map(|p| [&p.subject, &p.object])
            .filter_map(|t| match t {
                Term::Var(v) => Some(v.as_str()),
                Term::Const(_) => None,
            })
            .collect();
        for t in [&self.conclusion.subject, &self.conclusion.object] {
            if let Term::Var(v) = t {
                if !bound.contains(v.as_str()) {
                    return Err(RuleError::UnboundVariable { rule: self.name.clone(), var: v.clone() });
                }
            }
        }
        Ok(())
    }
}

impl RuleSet {
    pub fn parse(text: &str) -> Result<RuleSet, RuleError> {
        let mut rules: Vec<InferenceRule> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| RuleError::Malformed { line_no, reason };
            let (name, body) = line.split_once(':').ok_or_else(|| malformed("missing rule name".into()))?;
            let name = name.trim();
            if name.is_empty() || name.contains(['(', ')', ';', '\t']) {
                return Err(malformed(format!("invalid rule name {name:?}")));
            }
            let (lhs, rhs) = body.split_once("=>").ok_or_else(|| malformed("missing =>".into()))?;
            let premises = lhs
                .split('&')
                .map(parse_pattern)
                .collect::<Result<Vec<_>, _>>()
                .map_err(&malformed)?;
            let conclusion = parse_pattern(rhs).map_err(malformed)?;
            let rule = InferenceRule { name: name.to_string(), premises, conclusion };
            rule.check()?;
            if rules.iter().any(|r| r.name == rule.name) {
                return Err(RuleError::DuplicateName(rule.name));
            }
            rules.push(rule);
        }
        Ok(RuleSet { rules })
    }

    pub fn default_rules() -> RuleSet {
        RuleSet::parse(DEFAULT_RULES).expect("built-in rules parse")
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// A fact in the working set: (subject, predicate index, object).
type Fact = (u32, u32, u32);

#[derive(Default)]
struct FactIndex {
    all: HashSet<Fact>,
    by_p: HashMap<u32, Vec<(u32, u32)>>,
    by_ps: HashMap<(u32, u32), Vec<u32>>,
    by_po: HashMap<(u32, u32), Vec<u32>>,
}

impl FactIndex {
    fn add(&mut self, f: Fact) -> bool {
        if !self.all.insert(f) {
            return false;
        }
        let (s, p, o) = f;
        self.by_p.entry(p).or_default().push((s, o));
        self.by_ps.entry((p, s)).or_default().push(o);
        self.by_po.entry((p, o)).or_default().push(s);
        true
    }
}

/// A rule with predicates and constants resolved against the store.
struct Compiled<'r> {
    rule: &'r InferenceRule,
    premises: Vec<CPattern>,
    conclusion: CPattern,
}

#[derive(Clone, Copy)]
enum CTerm {
    Var(usize),
    Const(u32),
    /// A constant naming an entity absent from the store; never matches.
    Missing,
}

struct CPattern {
    s: CTerm,
    p: Option<u32>,
    o: CTerm,
}

struct Compiler<'a> {
    store: &'a GraphStore,
    preds: HashMap<String, u32>,
}

impl Compiler<'_> {
    fn pred(&mut self, name: &str) -> u32 {
        let next = self.preds.len() as u32;
        *self.preds.entry(name.to_string()).or_insert(next)
    }

    fn term(&self, t: &Term, vars: &mut Vec<String>) -> CTerm {
        match t {
            Term::Var(v) => {
                let idx = vars.iter().position(|x| x == v).unwrap_or_else(|| {
                    vars.push(v.clone());
                    vars.len() - 1
                });
                CTerm::Var(idx)
            }
            Term::Const(label) => match self.store.entity_by_label(label) {
                Some(id) => CTerm::Const(id.0),
                None => CTerm::Missing,
            },
        }
    }
}

type Binding = Vec<Option<u32>>;

fn unify_term(t: CTerm, value: u32, b: &mut Binding) -> bool {
    match t {
        CTerm::Const(c) => c == value,
        CTerm::Missing => false,
        CTerm::Var(i) => match b[i] {
            Some(v) => v == value,
            None => {
                b[i] = Some(value);
                true
            }
        },
    }
}

fn bound(t: CTerm, b: &Binding) -> Option<u32> {
    match t {
        CTerm::Const(c) => Some(c),
        CTerm::Var(i) => b[i],
        CTerm::Missing => None,
    }
}

fn match_fact(pat: &CPattern, f: Fact, b: &Binding) -> Option<Binding> {
    if pat.p != Some(f.1) {
        return None;
    }
    let mut b = b.clone();
    (unify_term(pat.s, f.0, &mut b) && unify_term(pat.o, f.2, &mut b)).then_some(b)
}

/// Extends `b` over the remaining premises (all except `skip`).
fn join(premises: &[CPattern], skip: usize, at: usize, b: Binding, facts: &FactIndex, out: &mut Vec<Binding>) {
    if at == premises.len() {
        out.push(b);
        return;
    }
    if at == skip {
        return join(premises, skip, at + 1, b, facts, out);
    }
    let pat = &premises[at];
    let Some(p) = pat.p else { return };
    let candidates: Vec<Fact> = match (bound(pat.s, &b), bound(pat.o, &b)) {
        (Some(s), Some(o)) => {
            if facts.all.contains(&(s, p, o)) {
                vec![(s, p, o)]
            } else {
                vec![]
            }
        }
        (Some(s), None) => facts.by_ps.get(&(p, s)).map_or(vec![], |os| os.iter().map(|&o| (s, p, o)).collect()),
        (None, Some(o)) => facts.by_po.get(&(p, o)).map_or(vec![], |ss| ss.iter().map(|&s| (s, p, o)).collect()),
        (None, None) => facts.by_p.get(&p).map_or(vec![], |so| so.iter().map(|&(s, o)| (s, p, o)).collect()),
    };
    for f in candidates {
        if let Some(next) = match_fact(pat, f, &b) {
            join(premises, skip, at + 1, next, facts, out);
        }
    }
}

/// A triple produced by inference.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DerivedTriple {
    pub s: EntityId,
    pub predicate: String,
    pub o: EntityId,
    pub rule: String,
}

/// Forward-chains `rules` over the asserted triples of `store` until no
/// new fact appears. Returns the facts that are not already asserted,
/// sorted, each tagged with the first rule that produced it.
///
/// Symmetric predicates match in both orientations. Conclusions that
/// would be self-loops are discarded.
pub fn saturate(store: &GraphStore, rules: &RuleSet) -> Result<Vec<DerivedTriple>, RuleError> {
    let mut compiler = Compiler { store, preds: HashMap::new() };
    let mut compiled = Vec::new();
    for rule in &rules.rules {
        let mut vars = Vec::new();
        let premises: Vec<CPattern> = rule
            .premises
            .iter()
            .map(|p| CPattern { s: compiler.term(&p.subject, &mut vars), p: Some(compiler.pred(&p.predicate)), o: compiler.term(&p.object, &mut vars) })
            .collect();
        let conclusion = CPattern {
            s: compiler.term(&rule.conclusion.subject, &mut vars),
            p: Some(compiler.pred(&rule.conclusion.predicate)),
            o: compiler.term(&rule.conclusion.object, &mut vars),
        };
        for (t, term) in [(conclusion.s, &rule.conclusion.subject), (conclusion.o, &rule.conclusion.object)] {
            if let (CTerm::Missing, Term::Const(label)) = (t, term) {
                return Err(RuleError::UnknownConstant { rule: rule.name.clone(), label: label.clone() });
            }
        }
        compiled.push((Compiled { rule, premises, conclusion }, vars.len()));
    }
    let symmetric: HashSet<u32> = compiler
        .preds
        .iter()
        .filter(|(name, _)| store.predicate(name).map_or_else(|| Predicate::named(name).symmetric, |p| p.symmetric))
        .map(|(_, &id)| id)
        .collect();

    let mut facts = FactIndex::default();
    let mut delta: Vec<Fact> = Vec::new();
    let push = |facts: &mut FactIndex, delta: &mut Vec<Fact>, f: Fact| {
        if facts.add(f) {
            delta.push(f);
        }
        if symmetric.contains(&f.1) && facts.add((f.2, f.1, f.0)) {
            delta.push((f.2, f.1, f.0));
        }
    };
    for t in store.triples().filter(|t| !t.derived) {
        if let Some(&p) = compiler.preds.get(&t.p.name) {
            push(&mut facts, &mut delta, (t.s.0, p, t.o.0));
        }
    }
    let asserted = facts.all.clone();

    let mut derived: BTreeMap<Fact, String> = BTreeMap::new();
    while !delta.is_empty() {
        let mut fresh: Vec<(Fact, &str)> = Vec::new();
        for (c, nvars) in &compiled {
            for k in 0..c.premises.len() {
                for &f in &delta {
                    let Some(b) = match_fact(&c.premises[k], f, &vec![None; *nvars]) else { continue };
                    let mut bindings = Vec::new();
                    join(&c.premises, k, 0, b, &facts, &mut bindings);
                    for b in bindings {
                        let (Some(s), Some(o)) = (bound(c.conclusion.s, &b), bound(c.conclusion.o, &b)) else {
                            continue;
                        };
                        let p = c.conclusion.p.expect("conclusion predicate");
                        if s != o && !facts.all.contains(&(s, p, o)) {
                            fresh.push(((s, p, o), &c.rule.name));
                        }
                    }
                }
            }
        }
        let mut next = Vec::new();
        for (f, rule) in fresh {
            if !facts.all.contains(&f) {
                push(&mut facts, &mut next, f);
                derived.entry(f).or_insert_with(|| rule.to_string());
            }
        }
        delta = next;
    }

    let names: HashMap<u32, &str> = compiler.preds.iter().map(|(n, &id)| (id, n.as_str())).collect();
    let mut out: Vec<DerivedTriple> = Vec::new();
    let mut emitted = HashSet::new();
    for (&(s, p, o), rule) in &derived {
        if asserted.contains(&(s, p, o)) {
            continue;
        }
        let (s, o) = if symmetric.contains(&p) && store.label(EntityId(o)) < store.label(EntityId(s)) { (o, s) } else { (s, o) };
        if emitted.insert((s, p, o)) {
            out.push(DerivedTriple { s: EntityId(s), predicate: names[&p].to_string(), o: EntityId(o), rule: rule.clone() });
        }
    }
    out.sort();
    Ok(out)
}

/// Inserts the saturation of `rules` into `store` as derived triples.
/// Returns how many new triples were added.
pub fn materialize(store: &mut GraphStore, rules: &RuleSet) -> Result<usize, RuleError> {
    let derived = saturate(store, rules)?;
    let mut added = 0;
    for d in derived {
        if store.insert_ids(d.s, &Predicate::named(&d.predicate), d.o, [Provenance::derived(d.rule)], true)? {
            added += 1;
        }
    }
    Ok(added)
}

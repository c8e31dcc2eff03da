//! In-memory triple store and executor for the SPARQL subset.
//!
//! Matching is conjunctive: a solution is an assignment of pattern
//! variables satisfying every triple pattern (by lexical equality) and
//! every filter. SELECT projects solutions, COUNT counts distinct values
//! of the counted variable, ASK tests for a non-empty solution set.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparql::{
    is_date_shape, CompareOp, QueryForm, SparqlQuery, Term, TermKind, TriplePattern,
};

/// Runtime type of a stored object or bound value; drives FILTER
/// comparison rules. Subjects and predicates are always `Str`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValueKind {
    Str,
    Number,
    Date,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub object_kind: ValueKind,
}

/// Immutable triple set with by-predicate and by-subject indexes.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    triples: Vec<Triple>,
    by_predicate: HashMap<String, Vec<usize>>,
    by_subject: HashMap<String, Vec<usize>>,
}

/// Result of executing one query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerSet {
    pub values: BTreeSet<String>,
    pub is_boolean: bool,
}

impl AnswerSet {
    pub fn from_values<I: IntoIterator<Item = String>>(values: I) -> Self {
        AnswerSet {
            values: values.into_iter().collect(),
            is_boolean: false,
        }
    }

    pub fn boolean(value: bool) -> Self {
        AnswerSet {
            values: std::iter::once(if value { "true" } else { "false" }.to_string()).collect(),
            is_boolean: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected 3 fields, got {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: empty field")]
    EmptyField { line: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ExecError {
    #[error("variable {0} is unbound by the graph pattern")]
    UnboundVariable(String),
    #[error("type-mismatched comparison in {filter}: {lhs:?} vs {rhs:?}")]
    TypeMismatch {
        filter: String,
        lhs: ValueKind,
        rhs: ValueKind,
    },
}

/// Classifies an object string by shape.
pub fn object_kind(lexical: &str) -> ValueKind {
    if is_date_shape(lexical) {
        ValueKind::Date
    } else if is_number_shape(lexical) {
        ValueKind::Number
    } else {
        ValueKind::Str
    }
}

fn is_number_shape(s: &str) -> bool {
    let s = s.strip_prefix('-').unwrap_or(s);
    if s.is_empty() {
        return false;
    }
    let mut parts = s.splitn(2, '.');
    let whole = parts.next().unwrap_or("");
    let frac = parts.next();
    !whole.is_empty()
        && whole.bytes().all(|b| b.is_ascii_digit())
        && frac.map_or(true, |f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

impl KnowledgeBase {
    pub fn from_triples<I: IntoIterator<Item = (String, String, String)>>(rows: I) -> Self {
        let mut seen = HashSet::new();
        let mut triples = Vec::new();
        for (subject, predicate, object) in rows {
            if seen.insert((subject.clone(), predicate.clone(), object.clone())) {
                let object_kind = object_kind(&object);
                triples.push(Triple {
                    subject,
                    predicate,
                    object,
                    object_kind,
                });
            }
        }
        let mut by_predicate: HashMap<String, Vec<usize>> = HashMap::new();
        let mut by_subject: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, t) in triples.iter().enumerate() {
            by_predicate.entry(t.predicate.clone()).or_default().push(i);
            by_subject.entry(t.subject.clone()).or_default().push(i);
        }
        KnowledgeBase {
            triples,
            by_predicate,
            by_subject,
        }
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

/// Loads a tab-separated `subject TAB predicate TAB object` file.
/// Blank lines and `#` comments are skipped; duplicate rows collapse.
pub fn load_kb(path: &Path) -> Result<KnowledgeBase, KbError> {
    let text = std::fs::read_to_string(path)?;
    load_kb_from_str(&text)
}

pub fn load_kb_from_str(text: &str) -> Result<KnowledgeBase, KbError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(KbError::FieldCount {
                line: line_no,
                found: fields.len(),
            });
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(KbError::EmptyField { line: line_no });
        }
        rows.push((
            fields[0].to_string(),
            fields[1].to_string(),
            fields[2].to_string(),
        ));
    }
    Ok(KnowledgeBase::from_triples(rows))
}

#[derive(Debug, Clone, PartialEq)]
struct Value {
    lexical: String,
    kind: ValueKind,
}

type Binding = HashMap<String, Value>;

/// Executes a parsed query. The result is a pure function of
/// `(kb, query)`.
pub fn execute(kb: &KnowledgeBase, query: &SparqlQuery) -> Result<AnswerSet, ExecError> {
    // Every variable the query consumes must be bound by some pattern.
    let mut pattern_vars: HashSet<&str> = HashSet::new();
    for p in &query.patterns {
        for t in [&p.subject, &p.predicate, &p.object] {
            if t.is_variable() {
                pattern_vars.insert(&t.lexical);
            }
        }
    }
    let mut required: Vec<&str> = query.projection.iter().map(|s| s.as_str()).collect();
    if let QueryForm::CountSelect { counted, .. } = &query.form {
        required.push(counted);
    }
    for f in &query.filters {
        for t in [&f.lhs, &f.rhs] {
            if t.is_variable() {
                required.push(&t.lexical);
            }
        }
    }
    for v in required {
        // The COUNT alias is synthesized, not pattern-bound.
        if let QueryForm::CountSelect { .. } = &query.form {
            if query.projection.iter().any(|p| p == v) {
                continue;
            }
        }
        if !pattern_vars.contains(v) {
            return Err(ExecError::UnboundVariable(v.to_string()));
        }
    }

    let mut solutions: Vec<Binding> = Vec::new();
    let mut remaining: Vec<&TriplePattern> = query.patterns.iter().collect();
    search(kb, &mut remaining, &mut Binding::new(), &mut solutions);

    // Filters apply to every pattern-satisfying assignment.
    let mut kept: Vec<&Binding> = Vec::new();
    'next: for b in &solutions {
        for f in &query.filters {
            if !eval_filter(f, b)? {
                continue 'next;
            }
        }
        kept.push(b);
    }

    match &query.form {
        QueryForm::Ask => Ok(AnswerSet::boolean(!kept.is_empty())),
        QueryForm::Select => {
            let values = kept.into_iter().map(|b| {
                query
                    .projection
                    .iter()
                    .map(|v| b[v.as_str()].lexical.as_str())
                    .collect::<Vec<_>>()
                    .join("\t")
            });
            Ok(AnswerSet::from_values(values))
        }
        QueryForm::CountSelect { counted, .. } => {
            let distinct: BTreeSet<&str> = kept
                .into_iter()
                .map(|b| b[counted.as_str()].lexical.as_str())
                .collect();
            Ok(AnswerSet::from_values(std::iter::once(
                distinct.len().to_string(),
            )))
        }
    }
}

/// Backtracking join: repeatedly grounds the pattern with the fewest
/// index candidates under the current binding. Order affects speed only.
fn search(
    kb: &KnowledgeBase,
    remaining: &mut Vec<&TriplePattern>,
    binding: &mut Binding,
    out: &mut Vec<Binding>,
) {
    if remaining.is_empty() {
        out.push(binding.clone());
        return;
    }
    let pick = remaining
        .iter()
        .enumerate()
        .min_by_key(|(_, p)| candidate_count(kb, p, binding))
        .map(|(i, _)| i)
        .expect("non-empty remaining");
    let pattern = remaining.swap_remove(pick);

    let indices: Vec<usize> = candidate_indices(kb, pattern, binding);
    for idx in indices {
        let triple = &kb.triples[idx];
        if let Some(new_vars) = match_triple(pattern, triple, binding) {
            for (name, value) in &new_vars {
                binding.insert(name.clone(), value.clone());
            }
            search(kb, remaining, binding, out);
            for (name, _) in &new_vars {
                binding.remove(name);
            }
        }
    }

    remaining.push(pattern);
    let last = remaining.len() - 1;
    remaining.swap(pick, last);
}

fn bound_lexical<'a>(term: &'a Term, binding: &'a Binding) -> Option<&'a str> {
    match term.kind {
        TermKind::Variable => binding.get(&term.lexical).map(|v| v.lexical.as_str()),
        _ => Some(&term.lexical),
    }
}

fn candidate_count(kb: &KnowledgeBase, pattern: &TriplePattern, binding: &Binding) -> usize {
    match (
        bound_lexical(&pattern.predicate, binding),
        bound_lexical(&pattern.subject, binding),
    ) {
        (Some(p), Some(s)) => {
            let by_p = kb.by_predicate.get(p).map_or(0, |v| v.len());
            let by_s = kb.by_subject.get(s).map_or(0, |v| v.len());
            by_p.min(by_s)
        }
        (Some(p), None) => kb.by_predicate.get(p).map_or(0, |v| v.len()),
        (None, Some(s)) => kb.by_subject.get(s).map_or(0, |v| v.len()),
        (None, None) => kb.triples.len(),
    }
}

fn candidate_indices(kb: &KnowledgeBase, pattern: &TriplePattern, binding: &Binding) -> Vec<usize> {
    static EMPTY: Vec<usize> = Vec::new();
    match (
        bound_lexical(&pattern.predicate, binding),
        bound_lexical(&pattern.subject, binding),
    ) {
        (Some(p), Some(s)) => {
            let by_p = kb.by_predicate.get(p).unwrap_or(&EMPTY);
            let by_s = kb.by_subject.get(s).unwrap_or(&EMPTY);
            if by_p.len() <= by_s.len() {
                by_p.clone()
            } else {
                by_s.clone()
            }
        }
        (Some(p), None) => kb.by_predicate.get(p).unwrap_or(&EMPTY).clone(),
        (None, Some(s)) => kb.by_subject.get(s).unwrap_or(&EMPTY).clone(),
        (None, None) => (0..kb.triples.len()).collect(),
    }
}

/// Checks one triple against one pattern under the binding; returns the
/// variables the match would newly bind.
fn match_triple(
    pattern: &TriplePattern,
    triple: &Triple,
    binding: &Binding,
) -> Option<Vec<(String, Value)>> {
    let slots = [
        (&pattern.subject, triple.subject.as_str(), ValueKind::Str),
        (&pattern.predicate, triple.predicate.as_str(), ValueKind::Str),
        (&pattern.object, triple.object.as_str(), triple.object_kind),
    ];
    let mut new_vars: Vec<(String, Value)> = Vec::new();
    for (term, actual, kind) in slots {
        match term.kind {
            TermKind::Variable => {
                if let Some(v) = binding.get(&term.lexical) {
                    if v.lexical != actual {
                        return None;
                    }
                } else if let Some((_, prior)) =
                    new_vars.iter().find(|(n, _)| n == &term.lexical)
                {
                    if prior.lexical != actual {
                        return None;
                    }
                } else {
                    new_vars.push((
                        term.lexical.clone(),
                        Value {
                            lexical: actual.to_string(),
                            kind,
                        },
                    ));
                }
            }
            _ => {
                if term.lexical != actual {
                    return None;
                }
            }
        }
    }
    Some(new_vars)
}

fn term_value(term: &Term, binding: &Binding) -> Value {
    match term.kind {
        TermKind::Variable => binding[&term.lexical].clone(),
        TermKind::NumericLiteral => Value {
            lexical: term.lexical.clone(),
            kind: ValueKind::Number,
        },
        TermKind::DateLiteral => Value {
            lexical: term.lexical.clone(),
            kind: ValueKind::Date,
        },
        TermKind::StringLiteral | TermKind::IriOrName => Value {
            lexical: term.lexical.clone(),
            kind: ValueKind::Str,
        },
    }
}

fn eval_filter(filter: &crate::sparql::FilterExpr, binding: &Binding) -> Result<bool, ExecError> {
    let lhs = term_value(&filter.lhs, binding);
    let rhs = term_value(&filter.rhs, binding);
    if lhs.kind != rhs.kind {
        return Err(ExecError::TypeMismatch {
            filter: filter.to_string(),
            lhs: lhs.kind,
            rhs: rhs.kind,
        });
    }
    let ord = match lhs.kind {
        ValueKind::Number => {
            let a: f64 = lhs.lexical.parse().unwrap_or(f64::NAN);
            let b: f64 = rhs.lexical.parse().unwrap_or(f64::NAN);
            a.partial_cmp(&b)
        }
        // Dates compare lexicographically in ISO-8601 form.
        ValueKind::Date | ValueKind::Str => Some(lhs.lexical.cmp(&rhs.lexical)),
    };
    let ord = match ord {
        Some(o) => o,
        None => return Ok(false),
    };
    Ok(match filter.op {
        CompareOp::Eq => ord.is_eq(),
        CompareOp::Ne => !ord.is_eq(),
        CompareOp::Lt => ord.is_lt(),
        CompareOp::Le => ord.is_le(),
        CompareOp::Gt => ord.is_gt(),
        CompareOp::Ge => ord.is_ge(),
    })
}

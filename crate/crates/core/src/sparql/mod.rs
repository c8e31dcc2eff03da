//! A small SPARQL subset: SELECT/ASK over basic graph patterns with
//! angle-bracketed relation names, literals, COUNT aggregation and FILTER
//! comparisons. Anything else is rejected as an unsupported construct
//! rather than mis-parsed.

mod lexer;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use parser::is_date_shape;

/// What a term is; the executor only needs the lexical plus this tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Variable,
    IriOrName,
    StringLiteral,
    NumericLiteral,
    DateLiteral,
}

/// One position of a triple pattern or filter. Variable lexicals keep
/// their `?` prefix; names drop their angle brackets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub kind: TermKind,
    pub lexical: String,
}

impl Term {
    pub fn variable(name: &str) -> Term {
        Term {
            kind: TermKind::Variable,
            lexical: if name.starts_with('?') {
                name.to_string()
            } else {
                format!("?{name}")
            },
        }
    }

    pub fn name(n: &str) -> Term {
        Term {
            kind: TermKind::IriOrName,
            lexical: n.to_string(),
        }
    }

    pub fn is_variable(&self) -> bool {
        self.kind == TermKind::Variable
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterExpr {
    pub op: CompareOp,
    pub lhs: Term,
    pub rhs: Term,
}

impl fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FILTER({} {} {})",
            print_term(&self.lhs),
            self.op.symbol(),
            print_term(&self.rhs)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryForm {
    Select,
    Ask,
    CountSelect { counted: String, distinct: bool },
}

/// Parsed query. `raw` keeps the original text; everything else is the
/// structure the executor consumes.
#[derive(Debug, Clone)]
pub struct SparqlQuery {
    pub form: QueryForm,
    pub projection: Vec<String>,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<FilterExpr>,
    pub raw: String,
}

impl SparqlQuery {
    /// Equality over everything except the original text.
    pub fn same_structure(&self, other: &SparqlQuery) -> bool {
        self.form == other.form
            && self.projection == other.projection
            && self.patterns == other.patterns
            && self.filters == other.filters
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SparqlError {
    #[error("lexical error at byte {pos}: {reason}")]
    Lex { pos: usize, reason: String },
    #[error("parse error at byte {pos}: {reason}")]
    Parse { pos: usize, reason: String },
    #[error("unsupported construct {construct} at byte {pos}")]
    Unsupported { construct: String, pos: usize },
    #[error("empty graph pattern")]
    EmptyGraphPattern,
    #[error("projection variable {0} is unbound (appears in no pattern or filter)")]
    UnboundProjection(String),
}

/// Parses `text` into the subset AST.
pub fn parse_sparql(text: &str) -> Result<SparqlQuery, SparqlError> {
    parser::parse(text)
}

/// Non-variable predicate lexicals across all patterns.
pub fn extract_relations(query: &SparqlQuery) -> BTreeSet<String> {
    query
        .patterns
        .iter()
        .filter(|p| p.predicate.kind == TermKind::IriOrName)
        .map(|p| p.predicate.lexical.clone())
        .collect()
}

/// Collapses whitespace runs to single spaces and trims; the only
/// rewriting applied to SPARQL text before embedding.
pub fn normalize_for_embedding(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn print_term(t: &Term) -> String {
    match t.kind {
        TermKind::Variable => t.lexical.clone(),
        TermKind::IriOrName => format!("<{}>", t.lexical),
        TermKind::NumericLiteral => t.lexical.clone(),
        TermKind::StringLiteral | TermKind::DateLiteral => {
            let escaped = t
                .lexical
                .replace('\\', "\\\\")
                .replace('"', "\\\"")
                .replace('\n', "\\n")
                .replace('\t', "\\t");
            format!("\"{escaped}\"")
        }
    }
}

/// Canonical single-line printer; `parse(print(q))` is structurally
/// equal to `q`. This form also names queries in reports.
pub fn to_canonical_string(query: &SparqlQuery) -> String {
    let mut out = String::new();
    match &query.form {
        QueryForm::Select => {
            out.push_str("SELECT ");
            out.push_str(&query.projection.join(" "));
        }
        QueryForm::Ask => out.push_str("ASK"),
        QueryForm::CountSelect { counted, distinct } => {
            let alias = query.projection.first().map(|s| s.as_str()).unwrap_or("?count");
            if *distinct {
                out.push_str(&format!("SELECT (COUNT(DISTINCT {counted}) AS {alias})"));
            } else {
                out.push_str(&format!("SELECT (COUNT({counted}) AS {alias})"));
            }
        }
    }
    if !matches!(query.form, QueryForm::Ask) {
        out.push_str(" WHERE");
    }
    out.push_str(" { ");
    for p in &query.patterns {
        out.push_str(&format!(
            "{} {} {} . ",
            print_term(&p.subject),
            print_term(&p.predicate),
            print_term(&p.object)
        ));
    }
    for f in &query.filters {
        out.push_str(&format!("{f} . "));
    }
    out.push('}');
    out
}

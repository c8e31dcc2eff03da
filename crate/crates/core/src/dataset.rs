//! Corpus ingestion and the canonical record model.
//!
//! A corpus file is UTF-8 JSON-lines: one object per line with keys
//! `id`, `question`, `sparql` (optional), `answers` (optional list),
//! `topic_entity_id` (optional) and `entities` (optional list of
//! `{start, end, type}` with character offsets).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The 18 OntoNotes NER labels, uppercased.
pub const ENTITY_TYPES: [&str; 18] = [
    "PERSON", "NORP", "FAC", "ORG", "GPE", "LOC", "PRODUCT", "EVENT", "WORK_OF_ART", "LAW",
    "LANGUAGE", "DATE", "TIME", "PERCENT", "MONEY", "QUANTITY", "ORDINAL", "CARDINAL",
];

/// Entity type label drawn from the OntoNotes tag set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityType {
    Person,
    Norp,
    Fac,
    Org,
    Gpe,
    Loc,
    Product,
    Event,
    WorkOfArt,
    Law,
    Language,
    Date,
    Time,
    Percent,
    Money,
    Quantity,
    Ordinal,
    Cardinal,
}

impl EntityType {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntityType::Person => "PERSON",
            EntityType::Norp => "NORP",
            EntityType::Fac => "FAC",
            EntityType::Org => "ORG",
            EntityType::Gpe => "GPE",
            EntityType::Loc => "LOC",
            EntityType::Product => "PRODUCT",
            EntityType::Event => "EVENT",
            EntityType::WorkOfArt => "WORK_OF_ART",
            EntityType::Law => "LAW",
            EntityType::Language => "LANGUAGE",
            EntityType::Date => "DATE",
            EntityType::Time => "TIME",
            EntityType::Percent => "PERCENT",
            EntityType::Money => "MONEY",
            EntityType::Quantity => "QUANTITY",
            EntityType::Ordinal => "ORDINAL",
            EntityType::Cardinal => "CARDINAL",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PERSON" => Ok(EntityType::Person),
            "NORP" => Ok(EntityType::Norp),
            "FAC" => Ok(EntityType::Fac),
            "ORG" => Ok(EntityType::Org),
            "GPE" => Ok(EntityType::Gpe),
            "LOC" => Ok(EntityType::Loc),
            "PRODUCT" => Ok(EntityType::Product),
            "EVENT" => Ok(EntityType::Event),
            "WORK_OF_ART" => Ok(EntityType::WorkOfArt),
            "LAW" => Ok(EntityType::Law),
            "LANGUAGE" => Ok(EntityType::Language),
            "DATE" => Ok(EntityType::Date),
            "TIME" => Ok(EntityType::Time),
            "PERCENT" => Ok(EntityType::Percent),
            "MONEY" => Ok(EntityType::Money),
            "QUANTITY" => Ok(EntityType::Quantity),
            "ORDINAL" => Ok(EntityType::Ordinal),
            "CARDINAL" => Ok(EntityType::Cardinal),
            other => Err(CorpusError::UnknownEntityType(other.to_string())),
        }
    }
}

impl Serialize for EntityType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for EntityType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A typed entity mention; offsets are character indices, `end` exclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub entity_type: EntityType,
    pub surface: String,
}

impl EntitySpan {
    /// Builds a span from offsets, deriving `surface` from the question.
    pub fn from_offsets(
        question: &str,
        start: usize,
        end: usize,
        entity_type: EntityType,
    ) -> Result<Self, CorpusError> {
        let n_chars = question.chars().count();
        if start >= end || end > n_chars {
            return Err(CorpusError::SpanOutOfBounds {
                start,
                end,
                len: n_chars,
            });
        }
        Ok(EntitySpan {
            start,
            end,
            entity_type,
            surface: char_slice(question, start, end),
        })
    }
}

/// Extracts `text[start..end]` by character offsets.
pub fn char_slice(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end - start).collect()
}

/// One dataset row: a question plus optional gold SPARQL, answers and
/// entity metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionRecord {
    pub id: String,
    pub question: String,
    pub gold_sparql: Option<String>,
    pub answers: BTreeSet<String>,
    pub topic_entity_id: Option<String>,
    pub entity_annotations: Option<Vec<EntitySpan>>,
}

/// An ordered, immutable collection of records. Iteration order is file
/// order; that order is the tie-break used by retrieval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    records: Vec<QuestionRecord>,
    split_name: String,
    by_id: HashMap<String, usize>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: invalid record: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: missing field {field}")]
    MissingField { line: usize, field: &'static str },
    #[error("duplicate id {id:?} on lines {first} and {second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },
    #[error("record {id:?}: entity span {start}..{end} out of bounds or invalid")]
    RecordSpan { id: String, start: usize, end: usize },
    #[error("record {id:?}: question is empty")]
    EmptyQuestion { id: String },
    #[error("entity span {start}..{end} out of bounds for question of length {len}")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },
    #[error("unknown entity type {0:?}")]
    UnknownEntityType(String),
    #[error("unknown record id {0:?}")]
    UnknownId(String),
}

#[derive(Deserialize)]
struct RawSpan {
    start: usize,
    end: usize,
    #[serde(rename = "type")]
    entity_type: String,
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    question: Option<String>,
    sparql: Option<String>,
    answers: Option<Vec<String>>,
    topic_entity_id: Option<String>,
    entities: Option<Vec<RawSpan>>,
}

#[derive(Serialize)]
struct OutSpan {
    start: usize,
    end: usize,
    #[serde(rename = "type")]
    entity_type: EntityType,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    id: &'a str,
    question: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    sparql: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    answers: Option<Vec<&'a str>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    topic_entity_id: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entities: Option<Vec<OutSpan>>,
}

impl Corpus {
    pub fn new(records: Vec<QuestionRecord>, split_name: &str) -> Result<Self, CorpusError> {
        let mut by_id = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if let Some(prev) = by_id.insert(r.id.clone(), i) {
                return Err(CorpusError::DuplicateId {
                    id: r.id.clone(),
                    first: prev + 1,
                    second: i + 1,
                });
            }
        }
        Ok(Corpus {
            records,
            split_name: split_name.to_string(),
            by_id,
        })
    }

    pub fn records(&self) -> &[QuestionRecord] {
        &self.records
    }

    pub fn split_name(&self) -> &str {
        &self.split_name
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&QuestionRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    /// Position of a record in file order, used as the retrieval tie-break.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, QuestionRecord> {
        self.records.iter()
    }

    /// Serializes back to the canonical JSON-lines form.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let rec = OutRecord {
                id: &r.id,
                question: &r.question,
                sparql: r.gold_sparql.as_deref(),
                answers: if r.answers.is_empty() {
                    None
                } else {
                    Some(r.answers.iter().map(|s| s.as_str()).collect())
                },
                topic_entity_id: r.topic_entity_id.as_deref(),
                entities: r.entity_annotations.as_ref().map(|spans| {
                    spans
                        .iter()
                        .map(|s| OutSpan {
                            start: s.start,
                            end: s.end,
                            entity_type: s.entity_type,
                        })
                        .collect()
                }),
            };
            out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

/// Loads a corpus from the canonical JSON-lines format.
pub fn load_corpus(path: &Path, split_name: &str) -> Result<Corpus, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    load_corpus_from_str(&text, split_name)
}

/// Same as [`load_corpus`] but over in-memory text.
pub fn load_corpus_from_str(text: &str, split_name: &str) -> Result<Corpus, CorpusError> {
    let mut records = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(line).map_err(|e| CorpusError::MalformedLine {
                line: line_no,
                reason: e.to_string(),
            })?;
        let id = raw.id.ok_or(CorpusError::MissingField {
            line: line_no,
            field: "id",
        })?;
        let question = raw.question.ok_or(CorpusError::MissingField {
            line: line_no,
            field: "question",
        })?;
        if question.trim().is_empty() {
            return Err(CorpusError::EmptyQuestion { id });
        }
        if let Some(prev) = seen.insert(id.clone(), line_no) {
            return Err(CorpusError::DuplicateId {
                id,
                first: prev,
                second: line_no,
            });
        }
        let entity_annotations = match raw.entities {
            None => None,
            Some(spans) => {
                let mut out = Vec::with_capacity(spans.len());
                for s in spans {
                    let ty: EntityType = s.entity_type.parse().map_err(|_| {
                        CorpusError::MalformedLine {
                            line: line_no,
                            reason: format!("unknown entity type {:?}", s.entity_type),
                        }
                    })?;
                    let span = EntitySpan::from_offsets(&question, s.start, s.end, ty).map_err(
                        |_| CorpusError::RecordSpan {
                            id: id.clone(),
                            start: s.start,
                            end: s.end,
                        },
                    )?;
                    out.push(span);
                }
                Some(out)
            }
        };
        records.push(QuestionRecord {
            id,
            question,
            gold_sparql: raw.sparql,
            answers: raw.answers.unwrap_or_default().into_iter().collect(),
            topic_entity_id: raw.topic_entity_id,
            entity_annotations,
        });
    }
    Corpus::new(records, split_name)
}

/// Checks every record's entity spans and reports violations instead of
/// failing. Empty result means the corpus is clean.
pub fn validate_annotations(corpus: &Corpus) -> Vec<String> {
    let mut violations = Vec::new();
    for r in corpus.iter() {
        let spans = match &r.entity_annotations {
            Some(s) => s,
            None => continue,
        };
        let n_chars = r.question.chars().count();
        for s in spans {
            if s.start >= s.end || s.end > n_chars {
                violations.push(format!(
                    "record {:?}: span {}..{} out of bounds (question length {})",
                    r.id, s.start, s.end, n_chars
                ));
                continue;
            }
            let actual = char_slice(&r.question, s.start, s.end);
            if actual != s.surface {
                violations.push(format!(
                    "record {:?}: span {}..{} surface {:?} does not match question text {:?}",
                    r.id, s.start, s.end, s.surface, actual
                ));
            }
        }
        let mut sorted: Vec<&EntitySpan> = spans.iter().collect();
        sorted.sort_by_key(|s| (s.start, s.end));
        for pair in sorted.windows(2) {
            if pair[1].start < pair[0].end {
                violations.push(format!(
                    "record {:?}: spans {}..{} and {}..{} overlap",
                    r.id, pair[0].start, pair[0].end, pair[1].start, pair[1].end
                ));
            }
        }
    }
    violations
}

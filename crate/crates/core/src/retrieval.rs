//! Exact nearest-neighbor retrieval of in-context examples.
//!
//! Three index views (raw question, anonymized question, gold SPARQL)
//! feed four strategies. Ranking is exact under negative Euclidean
//! similarity with ties broken by ascending training-corpus position,
//! so results are reproducible run to run.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anonymizer::{anonymize, gazetteer_annotate, AnonymizeError, Gazetteer};
use crate::dataset::{Corpus, QuestionRecord};
use crate::embedding::{similarity, Embedder, EmbeddingError, EmbeddingVector};
use crate::sparql::normalize_for_embedding;

/// Which text field of a record an index is built over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    RawQuestion,
    AnonymizedQuestion,
    GoldSparql,
}

impl View {
    pub fn as_str(&self) -> &'static str {
        match self {
            View::RawQuestion => "raw_question",
            View::AnonymizedQuestion => "anonymized_question",
            View::GoldSparql => "gold_sparql",
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for View {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw_question" => Ok(View::RawQuestion),
            "anonymized_question" => Ok(View::AnonymizedQuestion),
            "gold_sparql" => Ok(View::GoldSparql),
            other => Err(format!(
                "unknown view {other:?} (expected raw_question, anonymized_question or gold_sparql)"
            )),
        }
    }
}

/// Example-selection strategy; also tags each retrieved item with its
/// origin inside a hybrid result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Raw,
    Anonymized,
    Sparql,
    Hybrid,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Raw,
        Strategy::Anonymized,
        Strategy::Sparql,
        Strategy::Hybrid,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Raw => "raw",
            Strategy::Anonymized => "anonymized",
            Strategy::Sparql => "sparql",
            Strategy::Hybrid => "hybrid",
        }
    }

    /// Strategies that reuse a first-pass draft query.
    pub fn needs_draft(&self) -> bool {
        matches!(self, Strategy::Sparql | Strategy::Hybrid)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(Strategy::Raw),
            "anonymized" => Ok(Strategy::Anonymized),
            "sparql" => Ok(Strategy::Sparql),
            "hybrid" => Ok(Strategy::Hybrid),
            other => Err(format!(
                "unknown strategy {other:?} (expected raw, anonymized, sparql or hybrid)"
            )),
        }
    }
}

/// Retrieval configuration. `k` of 0 is allowed and yields an empty
/// result (used by the zero-shot condition of k sweeps).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub k: usize,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub exclude_ids: BTreeSet<String>,
}

impl StrategyConfig {
    pub fn new(strategy: Strategy, k: usize) -> Self {
        StrategyConfig {
            strategy,
            k,
            exclude_ids: BTreeSet::new(),
        }
    }
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig::new(Strategy::Hybrid, 6)
    }
}

/// One key per eligible training record, in training-corpus order.
#[derive(Debug, Clone)]
pub struct ExampleIndex {
    view: View,
    dim: usize,
    keys: Vec<(String, EmbeddingVector)>,
}

impl ExampleIndex {
    /// Builds an index directly from id/vector pairs. Key order is the
    /// tie-break order, so pass keys in training-corpus order.
    pub fn from_keys(
        view: View,
        dim: usize,
        keys: Vec<(String, EmbeddingVector)>,
    ) -> Result<Self, RetrievalError> {
        for (_, vec) in &keys {
            if vec.dim() != dim {
                return Err(RetrievalError::Embedding(
                    EmbeddingError::DimensionMismatch {
                        expected: dim,
                        actual: vec.dim(),
                    },
                ));
            }
        }
        Ok(ExampleIndex { view, dim, keys })
    }

    pub fn view(&self) -> View {
        self.view
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[(String, EmbeddingVector)] {
        &self.keys
    }
}

/// Index plus the records the build had to skip.
#[derive(Debug, Clone)]
pub struct IndexBuild {
    pub index: ExampleIndex,
    /// Ids of records missing the view's field.
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedItem {
    pub id: String,
    pub score: f32,
    pub strategy: Strategy,
}

/// Ranked example ids. Single-strategy results are sorted by similarity
/// descending (ties by ascending corpus position); hybrid results keep
/// the round-robin merge order, each item tagged with its origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub items: Vec<RetrievedItem>,
    pub k_requested: usize,
}

impl RetrievalResult {
    pub fn ids(&self) -> Vec<&str> {
        self.items.iter().map(|i| i.id.as_str()).collect()
    }
}

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("no {0} index available")]
    MissingIndex(View),
    #[error("strategy requires a draft query: run the anonymized pass first")]
    MissingDraft,
    #[error("record {0:?} lacks entity annotations and no gazetteer is configured")]
    MissingAnnotations(String),
    #[error("record {id:?}: {source}")]
    Anonymize {
        id: String,
        source: AnonymizeError,
    },
    #[error("embedding record {id:?}: {source}")]
    Embed {
        id: String,
        source: EmbeddingError,
    },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("index file line {line}: {reason}")]
    IndexFormat { line: usize, reason: String },
}

/// The text a view extracts from a record; `None` means the record is
/// skipped for that view.
fn view_text(
    record: &QuestionRecord,
    view: View,
    gazetteer: Option<&Gazetteer>,
) -> Result<Option<String>, RetrievalError> {
    match view {
        View::RawQuestion => Ok(Some(record.question.clone())),
        View::GoldSparql => Ok(record
            .gold_sparql
            .as_deref()
            .map(normalize_for_embedding)),
        View::AnonymizedQuestion => {
            let owned;
            let spans = match (&record.entity_annotations, gazetteer) {
                (Some(spans), _) => spans.as_slice(),
                (None, Some(gaz)) => {
                    owned = gazetteer_annotate(&record.question, gaz);
                    owned.as_slice()
                }
                (None, None) => return Ok(None),
            };
            let anon = anonymize(&record.question, spans).map_err(|source| {
                RetrievalError::Anonymize {
                    id: record.id.clone(),
                    source,
                }
            })?;
            Ok(Some(anon.text))
        }
    }
}

/// Builds an index over every record that carries the view's field.
pub fn build_index(
    corpus: &Corpus,
    view: View,
    embedder: &Embedder,
    gazetteer: Option<&Gazetteer>,
) -> Result<IndexBuild, RetrievalError> {
    let mut ids = Vec::new();
    let mut texts = Vec::new();
    let mut skipped = Vec::new();
    for record in corpus.iter() {
        match view_text(record, view, gazetteer)? {
            Some(text) => {
                ids.push(record.id.clone());
                texts.push(text);
            }
            None => skipped.push(record.id.clone()),
        }
    }
    let vectors = embedder
        .embed_batch(&texts)
        .map_err(|source| match ids.first() {
            Some(id) => RetrievalError::Embed {
                id: id.clone(),
                source,
            },
            None => RetrievalError::Embedding(source),
        })?;
    Ok(IndexBuild {
        index: ExampleIndex {
            view,
            dim: embedder.dim(),
            keys: ids.into_iter().zip(vectors).collect(),
        },
        skipped,
    })
}

/// Exact top-k scan. Excluded ids never appear in the result.
pub fn top_k(
    index: &ExampleIndex,
    query_vec: &EmbeddingVector,
    k: usize,
    exclude_ids: &BTreeSet<String>,
) -> Result<RetrievalResult, RetrievalError> {
    if query_vec.dim() != index.dim {
        return Err(RetrievalError::Embedding(EmbeddingError::DimensionMismatch {
            expected: index.dim,
            actual: query_vec.dim(),
        }));
    }
    let strategy = match index.view {
        View::RawQuestion => Strategy::Raw,
        View::AnonymizedQuestion => Strategy::Anonymized,
        View::GoldSparql => Strategy::Sparql,
    };
    let mut scored: Vec<(usize, f32)> = Vec::with_capacity(index.keys.len());
    for (pos, (id, vec)) in index.keys.iter().enumerate() {
        if exclude_ids.contains(id) {
            continue;
        }
        scored.push((pos, similarity(query_vec, vec)?));
    }
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite similarities")
            .then_with(|| a.0.cmp(&b.0))
    });
    scored.truncate(k);
    Ok(RetrievalResult {
        items: scored
            .into_iter()
            .map(|(pos, score)| RetrievedItem {
                id: index.keys[pos].0.clone(),
                score,
                strategy,
            })
            .collect(),
        k_requested: k,
    })
}

/// The per-strategy indexes a run needs. Strategies that are not used
/// may leave their index unset.
#[derive(Debug, Clone, Default)]
pub struct StrategyIndexes {
    pub raw: Option<ExampleIndex>,
    pub anonymized: Option<ExampleIndex>,
    pub sparql: Option<ExampleIndex>,
}

impl StrategyIndexes {
    fn get(&self, view: View) -> Result<&ExampleIndex, RetrievalError> {
        let idx = match view {
            View::RawQuestion => &self.raw,
            View::AnonymizedQuestion => &self.anonymized,
            View::GoldSparql => &self.sparql,
        };
        idx.as_ref().ok_or(RetrievalError::MissingIndex(view))
    }
}

/// Runs one strategy for one question. The `sparql` strategy embeds the
/// draft as given (noisy or empty drafts are allowed; only a wholly
/// absent draft is an error), and `hybrid` merges the anonymized,
/// sparql and raw legs in that order.
pub fn retrieve(
    config: &StrategyConfig,
    question: &QuestionRecord,
    indexes: &StrategyIndexes,
    embedder: &Embedder,
    gazetteer: Option<&Gazetteer>,
    draft_sparql: Option<&str>,
) -> Result<RetrievalResult, RetrievalError> {
    match config.strategy {
        Strategy::Raw => single_leg(config, question, indexes, embedder, gazetteer, None, View::RawQuestion),
        Strategy::Anonymized => single_leg(
            config,
            question,
            indexes,
            embedder,
            gazetteer,
            None,
            View::AnonymizedQuestion,
        ),
        Strategy::Sparql => {
            if draft_sparql.is_none() {
                return Err(RetrievalError::MissingDraft);
            }
            single_leg(
                config,
                question,
                indexes,
                embedder,
                gazetteer,
                draft_sparql,
                View::GoldSparql,
            )
        }
        Strategy::Hybrid => {
            if draft_sparql.is_none() {
                return Err(RetrievalError::MissingDraft);
            }
            let anonymized = single_leg(
                config,
                question,
                indexes,
                embedder,
                gazetteer,
                None,
                View::AnonymizedQuestion,
            )?;
            let sparql = single_leg(
                config,
                question,
                indexes,
                embedder,
                gazetteer,
                draft_sparql,
                View::GoldSparql,
            )?;
            let raw = single_leg(config, question, indexes, embedder, gazetteer, None, View::RawQuestion)?;
            Ok(merge_hybrid([anonymized, sparql, raw], config.k))
        }
    }
}

fn single_leg(
    config: &StrategyConfig,
    question: &QuestionRecord,
    indexes: &StrategyIndexes,
    embedder: &Embedder,
    gazetteer: Option<&Gazetteer>,
    draft_sparql: Option<&str>,
    view: View,
) -> Result<RetrievalResult, RetrievalError> {
    let index = indexes.get(view)?;
    let text = match view {
        View::RawQuestion => question.question.clone(),
        View::AnonymizedQuestion => {
            let record_text = view_text(question, view, gazetteer)?;
            record_text.ok_or_else(|| RetrievalError::MissingAnnotations(question.id.clone()))?
        }
        View::GoldSparql => {
            normalize_for_embedding(draft_sparql.ok_or(RetrievalError::MissingDraft)?)
        }
    };
    let vec = embedder.embed(&text)?;
    top_k(index, &vec, config.k, &config.exclude_ids)
}

/// Round-robin interleave in the fixed order anonymized, sparql, raw,
/// until `k` items or every list is exhausted. An id appearing in more
/// than one list belongs to the earliest strategy in that order; later
/// lists skip it, so items keep their originating tags and each
/// strategy's relative order survives the merge.
pub fn merge_hybrid(per_strategy: [RetrievalResult; 3], k: usize) -> RetrievalResult {
    let mut claimed: BTreeSet<String> = BTreeSet::new();
    let lanes: Vec<Vec<RetrievedItem>> = per_strategy
        .iter()
        .map(|list| {
            list.items
                .iter()
                .filter(|item| claimed.insert(item.id.clone()))
                .cloned()
                .collect()
        })
        .collect();

    let mut cursors = [0usize; 3];
    let mut items = Vec::new();
    while items.len() < k {
        let mut advanced = false;
        for (lane, cursor) in lanes.iter().zip(cursors.iter_mut()) {
            if items.len() >= k {
                break;
            }
            if *cursor < lane.len() {
                items.push(lane[*cursor].clone());
                *cursor += 1;
                advanced = true;
            }
        }
        if !advanced {
            break;
        }
    }
    RetrievalResult {
        items,
        k_requested: k,
    }
}

/// Writes `view<TAB>dim<TAB>count` then one `id<TAB>v1 v2 ...` line per
/// key, in index order.
pub fn save_index(index: &ExampleIndex, path: &Path) -> Result<(), RetrievalError> {
    let mut out = format!("{}\t{}\t{}\n", index.view, index.dim, index.keys.len());
    for (id, vec) in &index.keys {
        let values: Vec<String> = vec.values().iter().map(|v| format!("{v}")).collect();
        out.push_str(&format!("{id}\t{}\n", values.join(" ")));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Loads an index file, verifying the declared dimension and count.
pub fn load_index(path: &Path) -> Result<ExampleIndex, RetrievalError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(RetrievalError::IndexFormat {
        line: 1,
        reason: "missing header".into(),
    })?;
    let parts: Vec<&str> = header.split('\t').collect();
    if parts.len() != 3 {
        return Err(RetrievalError::IndexFormat {
            line: 1,
            reason: "header must be view<TAB>dim<TAB>count".into(),
        });
    }
    let view: View = parts[0].parse().map_err(|reason| RetrievalError::IndexFormat {
        line: 1,
        reason,
    })?;
    let dim: usize = parts[1].parse().map_err(|_| RetrievalError::IndexFormat {
        line: 1,
        reason: format!("bad dim {:?}", parts[1]),
    })?;
    let count: usize = parts[2].parse().map_err(|_| RetrievalError::IndexFormat {
        line: 1,
        reason: format!("bad count {:?}", parts[2]),
    })?;

    let mut keys = Vec::with_capacity(count);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let (id, rest) = line.split_once('\t').ok_or(RetrievalError::IndexFormat {
            line: line_no,
            reason: "expected id<TAB>values".into(),
        })?;
        let mut values = Vec::with_capacity(dim);
        for v in rest.split(' ').filter(|s| !s.is_empty()) {
            values.push(v.parse::<f32>().map_err(|_| RetrievalError::IndexFormat {
                line: line_no,
                reason: format!("bad float {v:?}"),
            })?);
        }
        if values.len() != dim {
            return Err(RetrievalError::IndexFormat {
                line: line_no,
                reason: format!("expected {dim} values, got {}", values.len()),
            });
        }
        keys.push((id.to_string(), EmbeddingVector::new(values)?));
    }
    if keys.len() != count {
        return Err(RetrievalError::IndexFormat {
            line: 1,
            reason: format!("header declares {count} records, found {}", keys.len()),
        });
    }
    Ok(ExampleIndex { view, dim, keys })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::load_corpus_from_str;
    use crate::embedding::EmbeddingProviderSpec;

    fn corpus(rows: &[(&str, &str, Option<&str>)]) -> Corpus {
        let text: String = rows
            .iter()
            .map(|(id, q, sparql)| match sparql {
                Some(s) => format!(
                    r#"{{"id":"{id}","question":"{q}","sparql":"{s}","answers":["x"]}}"#
                ) + "\n",
                None => format!(r#"{{"id":"{id}","question":"{q}"}}"#) + "\n",
            })
            .collect();
        load_corpus_from_str(&text, "train").unwrap()
    }

    fn hash_embedder(dim: usize) -> Embedder {
        Embedder::new(EmbeddingProviderSpec::hash_features(dim)).unwrap()
    }

    #[test]
    fn raw_index_covers_all_records() {
        let c = corpus(&[
            ("a", "who wrote this", Some("ASK { ?a <p> ?b . }")),
            ("b", "who read that", Some("ASK { ?a <q> ?b . }")),
            ("c", "who sang it", None),
        ]);
        let e = hash_embedder(16);
        let built = build_index(&c, View::RawQuestion, &e, None).unwrap();
        assert_eq!(built.index.len(), 3);
        assert!(built.skipped.is_empty());
    }

    #[test]
    fn sparql_index_skips_records_without_gold() {
        let c = corpus(&[
            ("a", "q one", Some("ASK { ?a <p> ?b . }")),
            ("b", "q two", None),
            ("c", "q three", None),
        ]);
        let e = hash_embedder(16);
        let built = build_index(&c, View::GoldSparql, &e, None).unwrap();
        assert_eq!(built.index.len(), 1);
        assert_eq!(built.skipped, vec!["b".to_string(), "c".to_string()]);
    }

    #[test]
    fn empty_corpus_builds_usable_empty_index() {
        let c = Corpus::new(vec![], "train").unwrap();
        let e = hash_embedder(8);
        let built = build_index(&c, View::RawQuestion, &e, None).unwrap();
        assert!(built.index.is_empty());
        let r = top_k(&built.index, &e.embed("anything").unwrap(), 5, &BTreeSet::new()).unwrap();
        assert!(r.items.is_empty());
    }

    #[test]
    fn identity_query_ranks_first_with_zero_score() {
        let c = corpus(&[
            ("a", "where was sabrina published", None),
            ("b", "who directed titanic", None),
            ("c", "how many rivers exist", None),
        ]);
        let e = hash_embedder(32);
        let built = build_index(&c, View::RawQuestion, &e, None).unwrap();
        let q = e.embed("who directed titanic").unwrap();
        let r = top_k(&built.index, &q, 2, &BTreeSet::new()).unwrap();
        assert_eq!(r.items[0].id, "b");
        assert_eq!(r.items[0].score, 0.0);
        assert_eq!(r.items[0].strategy, Strategy::Raw);
    }

    #[test]
    fn k_larger_than_index_returns_all_sorted() {
        let c = corpus(&[("a", "alpha beta", None), ("b", "gamma delta", None)]);
        let e = hash_embedder(32);
        let built = build_index(&c, View::RawQuestion, &e, None).unwrap();
        let r = top_k(&built.index, &e.embed("alpha beta").unwrap(), 10, &BTreeSet::new()).unwrap();
        assert_eq!(r.items.len(), 2);
        assert!(r.items[0].score >= r.items[1].score);
    }

    #[test]
    fn ties_break_by_corpus_position() {
        // Identical questions embed identically; order must follow file order.
        let c = corpus(&[
            ("first", "same words here", None),
            ("second", "same words here", None),
            ("third", "same words here", None),
        ]);
        let e = hash_embedder(16);
        let built = build_index(&c, View::RawQuestion, &e, None).unwrap();
        let r = top_k(&built.index, &e.embed("same words here").unwrap(), 3, &BTreeSet::new())
            .unwrap();
        assert_eq!(r.ids(), ["first", "second", "third"]);
    }

    #[test]
    fn excluded_ids_never_appear() {
        let c = corpus(&[
            ("a", "same words", None),
            ("b", "same words", None),
        ]);
        let e = hash_embedder(16);
        let built = build_index(&c, View::RawQuestion, &e, None).unwrap();
        let exclude: BTreeSet<String> = ["a".to_string()].into();
        let r = top_k(&built.index, &e.embed("same words").unwrap(), 5, &exclude).unwrap();
        assert_eq!(r.ids(), ["b"]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let c = corpus(&[("a", "text", None)]);
        let e = hash_embedder(16);
        let built = build_index(&c, View::RawQuestion, &e, None).unwrap();
        let other = hash_embedder(8).embed("text").unwrap();
        assert!(top_k(&built.index, &other, 1, &BTreeSet::new()).is_err());
    }

    #[test]
    fn merge_hybrid_follows_strategy_order_with_dedup() {
        let item = |id: &str, strategy| RetrievedItem {
            id: id.to_string(),
            score: 0.0,
            strategy,
        };
        let a = RetrievalResult {
            items: vec![item("a1", Strategy::Anonymized), item("a2", Strategy::Anonymized)],
            k_requested: 2,
        };
        let s = RetrievalResult {
            items: vec![item("a1", Strategy::Sparql), item("s1", Strategy::Sparql)],
            k_requested: 2,
        };
        let r = RetrievalResult {
            items: vec![item("r1", Strategy::Raw)],
            k_requested: 2,
        };
        let merged = merge_hybrid([a, s, r], 4);
        let tags: Vec<(&str, Strategy)> = merged
            .items
            .iter()
            .map(|i| (i.id.as_str(), i.strategy))
            .collect();
        assert_eq!(
            tags,
            vec![
                ("a1", Strategy::Anonymized),
                ("s1", Strategy::Sparql),
                ("r1", Strategy::Raw),
                ("a2", Strategy::Anonymized),
            ]
        );
    }

    #[test]
    fn merge_hybrid_identical_lists_dedupe_to_first() {
        let mk = |strategy| RetrievalResult {
            items: ["x", "y", "z"]
                .iter()
                .map(|id| RetrievedItem {
                    id: id.to_string(),
                    score: 0.0,
                    strategy,
                })
                .collect(),
            k_requested: 3,
        };
        let merged = merge_hybrid(
            [mk(Strategy::Anonymized), mk(Strategy::Sparql), mk(Strategy::Raw)],
            3,
        );
        assert_eq!(merged.ids(), ["x", "y", "z"]);
        assert!(merged.items.iter().all(|i| i.strategy == Strategy::Anonymized));
    }

    #[test]
    fn merge_hybrid_disjoint_round_robin() {
        let mk = |prefix: &str, strategy| RetrievalResult {
            items: (0..2)
                .map(|i| RetrievedItem {
                    id: format!("{prefix}{i}"),
                    score: 0.0,
                    strategy,
                })
                .collect(),
            k_requested: 2,
        };
        let merged = merge_hybrid(
            [
                mk("a", Strategy::Anonymized),
                mk("s", Strategy::Sparql),
                mk("r", Strategy::Raw),
            ],
            6,
        );
        assert_eq!(merged.ids(), ["a0", "s0", "r0", "a1", "s1", "r1"]);
    }

    #[test]
    fn retrieve_raw_identity() {
        let c = corpus(&[
            ("a", "who directed titanic", Some("ASK { ?a <p> ?b . }")),
            ("b", "where is paris", Some("ASK { ?a <q> ?b . }")),
        ]);
        let e = hash_embedder(32);
        let indexes = StrategyIndexes {
            raw: Some(build_index(&c, View::RawQuestion, &e, None).unwrap().index),
            ..Default::default()
        };
        let cfg = StrategyConfig::new(Strategy::Raw, 1);
        let r = retrieve(&cfg, c.get("a").unwrap(), &indexes, &e, None, None).unwrap();
        assert_eq!(r.ids(), ["a"]);
        assert_eq!(r.items[0].score, 0.0);
    }

    #[test]
    fn sparql_strategy_with_empty_draft_matches_zero_vector_scan() {
        let c = corpus(&[
            ("a", "q1", Some("SELECT ?x WHERE { ?e <p> ?x . }")),
            ("b", "q2", Some("SELECT ?x WHERE { ?e <q> ?x . ?e <r> ?y . }")),
        ]);
        let e = hash_embedder(32);
        let indexes = StrategyIndexes {
            sparql: Some(build_index(&c, View::GoldSparql, &e, None).unwrap().index),
            ..Default::default()
        };
        let cfg = StrategyConfig::new(Strategy::Sparql, 2);
        let got = retrieve(&cfg, c.get("a").unwrap(), &indexes, &e, None, Some("")).unwrap();
        // Brute force with an explicit zero vector.
        let zero = EmbeddingVector::new(vec![0.0; 32]).unwrap();
        let expect = top_k(indexes.sparql.as_ref().unwrap(), &zero, 2, &BTreeSet::new()).unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn sparql_strategy_without_draft_is_an_error() {
        let c = corpus(&[("a", "q1", Some("ASK { ?a <p> ?b . }"))]);
        let e = hash_embedder(8);
        let indexes = StrategyIndexes {
            sparql: Some(build_index(&c, View::GoldSparql, &e, None).unwrap().index),
            ..Default::default()
        };
        let cfg = StrategyConfig::new(Strategy::Sparql, 1);
        let err = retrieve(&cfg, c.get("a").unwrap(), &indexes, &e, None, None).unwrap_err();
        assert!(matches!(err, RetrievalError::MissingDraft));
    }

    #[test]
    fn anonymized_strategy_is_surface_blind() {
        let rows = concat!(
            r#"{"id":"a","question":"Did Alice direct Titanic?","entities":[{"start":4,"end":9,"type":"PERSON"},{"start":17,"end":24,"type":"WORK_OF_ART"}]}"#,
            "\n",
            r#"{"id":"b","question":"Did Boris direct Gravity?","entities":[{"start":4,"end":9,"type":"PERSON"},{"start":17,"end":24,"type":"WORK_OF_ART"}]}"#,
            "\n",
            r#"{"id":"c","question":"Totally different words here","entities":[]}"#,
            "\n"
        );
        let c = load_corpus_from_str(rows, "train").unwrap();
        let e = hash_embedder(32);
        let indexes = StrategyIndexes {
            anonymized: Some(
                build_index(&c, View::AnonymizedQuestion, &e, None).unwrap().index,
            ),
            ..Default::default()
        };
        let cfg = StrategyConfig::new(Strategy::Anonymized, 3);
        let ra = retrieve(&cfg, c.get("a").unwrap(), &indexes, &e, None, None).unwrap();
        let rb = retrieve(&cfg, c.get("b").unwrap(), &indexes, &e, None, None).unwrap();
        assert_eq!(ra, rb);
    }

    #[test]
    fn index_round_trips_through_file() {
        let c = corpus(&[("a", "alpha beta", None), ("b", "gamma delta", None)]);
        let e = hash_embedder(8);
        let built = build_index(&c, View::RawQuestion, &e, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index_raw.tsv");
        save_index(&built.index, &path).unwrap();
        let loaded = load_index(&path).unwrap();
        assert_eq!(loaded.view(), View::RawQuestion);
        assert_eq!(loaded.dim(), 8);
        assert_eq!(loaded.keys(), built.index.keys());
    }

    #[test]
    fn index_load_rejects_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tsv");
        std::fs::write(&path, "raw_question\t2\t3\na\t0 1\n").unwrap();
        assert!(matches!(
            load_index(&path),
            Err(RetrievalError::IndexFormat { .. })
        ));
    }

    mod props {
        use super::{merge_hybrid, RetrievalResult, RetrievedItem, Strategy as Tag};
        use proptest::prelude::*;
        use std::collections::BTreeSet;

        proptest! {
            // Exclusion soundness and hybrid-subset over random lists.
            #[test]
            fn hybrid_ids_subset_and_order_preserved(
                ids_a in proptest::collection::vec(0u8..12, 0..6),
                ids_s in proptest::collection::vec(0u8..12, 0..6),
                ids_r in proptest::collection::vec(0u8..12, 0..6),
                k in 0usize..8,
            ) {
                let mk = |ids: &[u8], strategy| {
                    let mut seen = BTreeSet::new();
                    RetrievalResult {
                        items: ids
                            .iter()
                            .filter(|i| seen.insert(**i))
                            .map(|i| RetrievedItem { id: format!("x{i}"), score: 0.0, strategy })
                            .collect(),
                        k_requested: ids.len(),
                    }
                };
                let a = mk(&ids_a, Tag::Anonymized);
                let s = mk(&ids_s, Tag::Sparql);
                let r = mk(&ids_r, Tag::Raw);
                let union: BTreeSet<String> = a
                    .items
                    .iter()
                    .chain(&s.items)
                    .chain(&r.items)
                    .map(|i| i.id.clone())
                    .collect();
                let merged = merge_hybrid([a.clone(), s.clone(), r.clone()], k);
                prop_assert!(merged.items.len() <= k.min(union.len()));

                // No duplicates, all from the union.
                let mut seen = BTreeSet::new();
                for item in &merged.items {
                    prop_assert!(union.contains(&item.id));
                    prop_assert!(seen.insert(item.id.clone()));
                }

                // Within-strategy relative order is preserved.
                for (src, strategy) in [(&a, Tag::Anonymized), (&s, Tag::Sparql), (&r, Tag::Raw)] {
                    let merged_order: Vec<&str> = merged
                        .items
                        .iter()
                        .filter(|i| i.strategy == strategy)
                        .map(|i| i.id.as_str())
                        .collect();
                    let src_order: Vec<&str> = src
                        .items
                        .iter()
                        .map(|i| i.id.as_str())
                        .filter(|id| merged_order.contains(id))
                        .collect();
                    prop_assert_eq!(merged_order, src_order);
                }
            }
        }
    }
}

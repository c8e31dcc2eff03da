//! Retrieval-augmented text-to-SPARQL over a small knowledge base:
//! select in-context examples by four strategies, build few-shot prompts,
//! obtain SPARQL from a pluggable gateway, execute it, and score the
//! results with relation-recall diagnostics.

pub mod anonymizer;
pub mod dataset;
pub mod embedding;
pub mod evaluation;
pub mod kb;
pub mod llm;
pub mod pipeline;
pub mod prompting;
pub mod retrieval;
pub mod sparql;
pub mod synth;

pub use anonymizer::{anonymize, gazetteer_annotate, AnonymizedQuestion, Gazetteer};
pub use dataset::{
    load_corpus, validate_annotations, Corpus, EntitySpan, EntityType, QuestionRecord,
};
pub use embedding::{similarity, Embedder, EmbeddingProviderSpec, EmbeddingVector, ProviderKind};
pub use evaluation::{EvalReport, FailureKind, QuestionVerdict};
pub use kb::{execute, load_kb, AnswerSet, KnowledgeBase, Triple};
pub use llm::{LlmConfig, LlmGateway, LlmKind};
pub use pipeline::{DraftCache, RunConfig, RunContext, Runner};
pub use prompting::{build_prompt, Prompt};
pub use retrieval::{
    build_index, merge_hybrid, retrieve, top_k, ExampleIndex, RetrievalResult, Strategy,
    StrategyConfig, StrategyIndexes, View,
};
pub use sparql::{
    extract_relations, normalize_for_embedding, parse_sparql, to_canonical_string, SparqlQuery,
};

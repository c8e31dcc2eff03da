//! Per-question orchestration and batch running.
//!
//! Strategies that polish a draft (`sparql`, `hybrid`) run two passes:
//! pass 1 executes the anonymized strategy end to end to obtain a draft
//! query, pass 2 retrieves by draft similarity and completes again.
//! Drafts are cached per (question id, pass-1 config digest) so the two
//! strategies share one pass-1 run in a session, and the cache can be
//! persisted and reloaded to reproduce pass 2 exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anonymizer::Gazetteer;
use crate::dataset::{Corpus, QuestionRecord};
use crate::embedding::{text_digest, Embedder, EmbeddingProviderSpec};
use crate::evaluation::{
    relation_recall, score_answers, EvalReport, FailureKind, QuestionVerdict,
};
use crate::kb::{execute, AnswerSet, KnowledgeBase};
use crate::llm::{LlmConfig, LlmError, LlmGateway};
use crate::prompting::{build_prompt, Prompt};
use crate::retrieval::{
    retrieve, RetrievalError, RetrievalResult, Strategy, StrategyConfig, StrategyIndexes, View,
};
use crate::sparql::parse_sparql;

pub const DEFAULT_BIN_COUNT: usize = 5;

/// Everything a run needs to know.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub strategy: StrategyConfig,
    pub provider: EmbeddingProviderSpec,
    pub llm: LlmConfig,
    pub inject_topic_entity: bool,
    pub instruction: String,
    pub parallelism: usize,
    /// Per-run request limit; `None` is unlimited.
    pub budget: Option<u64>,
    /// Bar training records whose question text equals the query's.
    pub exclude_self: bool,
}

impl RunConfig {
    pub fn new(strategy: StrategyConfig, provider: EmbeddingProviderSpec, llm: LlmConfig) -> Self {
        RunConfig {
            strategy,
            provider,
            llm,
            inject_topic_entity: false,
            instruction: crate::prompting::DEFAULT_INSTRUCTION.to_string(),
            parallelism: 1,
            budget: None,
            exclude_self: false,
        }
    }

    /// The part of the configuration that determines report content.
    /// Parallelism is execution metadata and deliberately left out so
    /// reports are byte-identical across worker counts.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::json!({
            "strategy": self.strategy,
            "provider": self.provider,
            "llm": self.llm,
            "inject_topic_entity": self.inject_topic_entity,
            "instruction": self.instruction,
            "budget": self.budget,
            "exclude_self": self.exclude_self,
        })
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Draft completions keyed by (question id, pass-1 config digest).
#[derive(Debug, Default)]
pub struct DraftCache {
    entries: Mutex<BTreeMap<(String, String), String>>,
}

#[derive(Serialize, Deserialize)]
struct DraftLine {
    question_id: String,
    config_digest: String,
    draft: String,
}

impl DraftCache {
    pub fn new() -> Self {
        DraftCache::default()
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let cache = DraftCache::new();
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            let mut entries = cache.entries.lock().expect("draft lock");
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let rec: DraftLine = serde_json::from_str(line).map_err(|e| {
                    std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
                })?;
                entries.insert((rec.question_id, rec.config_digest), rec.draft);
            }
            drop(entries);
        }
        Ok(cache)
    }

    pub fn get(&self, question_id: &str, digest: &str) -> Option<String> {
        self.entries
            .lock()
            .expect("draft lock")
            .get(&(question_id.to_string(), digest.to_string()))
            .cloned()
    }

    pub fn put(&self, question_id: &str, digest: &str, draft: &str) {
        self.entries.lock().expect("draft lock").insert(
            (question_id.to_string(), digest.to_string()),
            draft.to_string(),
        );
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("draft lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes entries in sorted key order, so the file is stable.
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let entries = self.entries.lock().expect("draft lock");
        let mut out = String::new();
        for ((question_id, config_digest), draft) in entries.iter() {
            let line = DraftLine {
                question_id: question_id.clone(),
                config_digest: config_digest.clone(),
                draft: draft.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("draft line serializes"));
            out.push('\n');
        }
        std::fs::write(path, out)
    }
}

/// Artifacts from the first (draft-producing) pass.
pub struct DraftOutcome {
    pub draft: String,
    pub from_cache: bool,
    pub retrieval: Option<RetrievalResult>,
    pub prompt: Option<Prompt>,
    pub completion_text: Option<String>,
}

/// Per-question artifacts surfaced for prompt dumps and tracing.
pub struct QuestionRun {
    pub verdict: QuestionVerdict,
    pub pass1_prompt: Option<String>,
    pub final_prompt: Option<String>,
    pub completion_text: Option<String>,
}

/// Shared, read-only context for one run.
pub struct Runner<'a> {
    config: RunConfig,
    train: &'a Corpus,
    indexes: &'a StrategyIndexes,
    kb: &'a KnowledgeBase,
    embedder: &'a Embedder,
    gazetteer: Option<&'a Gazetteer>,
    drafts: &'a DraftCache,
    gateway: LlmGateway,
    /// Training ids grouped by exact question text, for self-exclusion.
    by_question_text: HashMap<String, Vec<String>>,
    pass1_digest: String,
}

impl<'a> Runner<'a> {
    pub fn new(
        config: RunConfig,
        train: &'a Corpus,
        indexes: &'a StrategyIndexes,
        kb: &'a KnowledgeBase,
        embedder: &'a Embedder,
        gazetteer: Option<&'a Gazetteer>,
        drafts: &'a DraftCache,
    ) -> Result<Self, PipelineError> {
        let gateway = LlmGateway::new(config.llm.clone(), config.budget)?;
        let mut by_question_text: HashMap<String, Vec<String>> = HashMap::new();
        if config.exclude_self {
            for r in train.iter() {
                by_question_text
                    .entry(r.question.clone())
                    .or_default()
                    .push(r.id.clone());
            }
        }
        let pass1_digest = text_digest(
            &serde_json::json!({
                "provider": config.provider,
                "llm": config.llm,
                "k": config.strategy.k,
                "exclude_ids": config.strategy.exclude_ids,
                "exclude_self": config.exclude_self,
                "instruction": config.instruction,
                "inject_topic_entity": config.inject_topic_entity,
            })
            .to_string(),
        );
        Ok(Runner {
            config,
            train,
            indexes,
            kb,
            embedder,
            gazetteer,
            drafts,
            gateway,
            by_question_text,
            pass1_digest,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn gateway(&self) -> &LlmGateway {
        &self.gateway
    }

    pub fn pass1_digest(&self) -> &str {
        &self.pass1_digest
    }

    /// Views the configured strategy needs; missing ones are a
    /// configuration error surfaced before any question runs.
    pub fn required_views(&self) -> Vec<View> {
        views_for(self.config.strategy.strategy)
    }

    pub fn check_indexes(&self) -> Result<(), PipelineError> {
        for view in self.required_views() {
            let present = match view {
                View::RawQuestion => self.indexes.raw.is_some(),
                View::AnonymizedQuestion => self.indexes.anonymized.is_some(),
                View::GoldSparql => self.indexes.sparql.is_some(),
            };
            if !present {
                return Err(PipelineError::Retrieval(RetrievalError::MissingIndex(view)));
            }
        }
        Ok(())
    }

    fn exclusion_for(&self, question: &QuestionRecord) -> BTreeSet<String> {
        let mut exclude = self.config.strategy.exclude_ids.clone();
        if self.config.exclude_self {
            if let Some(ids) = self.by_question_text.get(&question.question) {
                exclude.extend(ids.iter().cloned());
            }
        }
        exclude
    }

    fn resolve(&self, result: &RetrievalResult) -> Vec<&'a QuestionRecord> {
        result
            .items
            .iter()
            .filter_map(|item| self.train.get(&item.id))
            .collect()
    }

    /// Pass 1: runs the anonymized strategy end to end and returns its
    /// completion as the draft. Noisy or unparseable completions are
    /// used as-is; the draft is the extracted query when extraction
    /// succeeds, otherwise the raw completion text.
    pub fn draft_for(&self, question: &QuestionRecord) -> Result<DraftOutcome, PipelineError> {
        if let Some(draft) = self.drafts.get(&question.id, &self.pass1_digest) {
            return Ok(DraftOutcome {
                draft,
                from_cache: true,
                retrieval: None,
                prompt: None,
                completion_text: None,
            });
        }
        let cfg = StrategyConfig {
            strategy: Strategy::Anonymized,
            k: self.config.strategy.k,
            exclude_ids: self.exclusion_for(question),
        };
        let retrieval = retrieve(
            &cfg,
            question,
            self.indexes,
            self.embedder,
            self.gazetteer,
            None,
        )?;
        let examples = self.resolve(&retrieval);
        let prompt = build_prompt(
            &examples,
            question,
            &self.config.instruction,
            self.config.inject_topic_entity,
        )
        .map_err(|e| {
            PipelineError::Llm(LlmError::InvalidConfig(format!(
                "pass-1 prompt failed: {e}"
            )))
        })?;
        let completion = self.gateway.complete(&prompt, Some(question))?;
        let draft = completion
            .extracted_sparql
            .clone()
            .unwrap_or_else(|| completion.text.clone());
        self.drafts.put(&question.id, &self.pass1_digest, &draft);
        Ok(DraftOutcome {
            draft,
            from_cache: false,
            retrieval: Some(retrieval),
            prompt: Some(prompt),
            completion_text: Some(completion.text),
        })
    }

    /// Final-pass retrieval under the configured strategy.
    pub fn final_retrieval(
        &self,
        question: &QuestionRecord,
        draft: Option<&str>,
    ) -> Result<RetrievalResult, RetrievalError> {
        let cfg = StrategyConfig {
            strategy: self.config.strategy.strategy,
            k: self.config.strategy.k,
            exclude_ids: self.exclusion_for(question),
        };
        retrieve(
            &cfg,
            question,
            self.indexes,
            self.embedder,
            self.gazetteer,
            draft,
        )
    }

    /// Runs one question end to end, converting every failure into a
    /// scored-zero verdict rather than an error. `llm_error` covers any
    /// failure to obtain a completion (retrieval, prompt, transport or
    /// budget); parse and execution failures keep their own kinds.
    pub fn run_question(&self, question: &QuestionRecord) -> QuestionRun {
        let outcome = catch_unwind(AssertUnwindSafe(|| self.try_question(question)));
        match outcome {
            Ok(run) => run,
            // A panic in one question's parse/execute path becomes a
            // failed verdict so the batch keeps going.
            Err(_) => QuestionRun {
                verdict: failed_verdict(question, None, None, FailureKind::ExecError),
                pass1_prompt: None,
                final_prompt: None,
                completion_text: None,
            },
        }
    }

    fn try_question(&self, question: &QuestionRecord) -> QuestionRun {
        let mut pass1_prompt = None;
        let draft = if self.config.strategy.strategy.needs_draft() {
            match self.draft_for(question) {
                Ok(outcome) => {
                    pass1_prompt = outcome.prompt.map(|p| p.rendered);
                    Some(outcome.draft)
                }
                Err(_) => {
                    return QuestionRun {
                        verdict: failed_verdict(question, None, None, FailureKind::LlmError),
                        pass1_prompt: None,
                        final_prompt: None,
                        completion_text: None,
                    }
                }
            }
        } else {
            None
        };

        let retrieval = match self.final_retrieval(question, draft.as_deref()) {
            Ok(r) => r,
            Err(_) => {
                return QuestionRun {
                    verdict: failed_verdict(question, None, None, FailureKind::LlmError),
                    pass1_prompt,
                    final_prompt: None,
                    completion_text: None,
                }
            }
        };
        let examples = self.resolve(&retrieval);
        let recall = question
            .gold_sparql
            .as_deref()
            .and_then(|gold| relation_recall(gold, &examples));

        let prompt = match build_prompt(
            &examples,
            question,
            &self.config.instruction,
            self.config.inject_topic_entity,
        ) {
            Ok(p) => p,
            Err(_) => {
                return QuestionRun {
                    verdict: failed_verdict(question, recall, None, FailureKind::LlmError),
                    pass1_prompt,
                    final_prompt: None,
                    completion_text: None,
                }
            }
        };

        let completion = match self.gateway.complete(&prompt, Some(question)) {
            Ok(c) => c,
            Err(_) => {
                return QuestionRun {
                    verdict: failed_verdict(question, recall, None, FailureKind::LlmError),
                    pass1_prompt,
                    final_prompt: Some(prompt.rendered),
                    completion_text: None,
                }
            }
        };

        let verdict = score_prediction(self.kb, question, recall, completion.extracted_sparql.as_deref());
        QuestionRun {
            verdict,
            pass1_prompt,
            final_prompt: Some(prompt.rendered),
            completion_text: Some(completion.text),
        }
    }

    /// Runs a whole corpus. Verdict order equals question order no
    /// matter how execution interleaves. When a budget is set, the run
    /// admits the longest question prefix whose worst-case request cost
    /// fits, flags the report partial if that excludes anything, and
    /// reports only admitted questions.
    pub fn run_batch(&self, questions: &Corpus) -> Result<EvalReport, PipelineError> {
        self.check_indexes()?;
        let cost_per_question: u64 = if self.config.strategy.strategy.needs_draft() {
            2
        } else {
            1
        };
        let admitted = match self.config.budget {
            Some(budget) => ((budget / cost_per_question) as usize).min(questions.len()),
            None => questions.len(),
        };
        let partial = admitted < questions.len();

        let records: Vec<&QuestionRecord> = questions.iter().take(admitted).collect();
        let slots: Mutex<Vec<Option<QuestionRun>>> =
            Mutex::new((0..records.len()).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        let workers = self.config.parallelism.max(1).min(records.len().max(1));

        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= records.len() {
                        break;
                    }
                    let run = self.run_question(records[i]);
                    slots.lock().expect("slot lock")[i] = Some(run);
                });
            }
        });

        let runs: Vec<QuestionRun> = slots
            .into_inner()
            .expect("slot lock")
            .into_iter()
            .map(|r| r.expect("every admitted question ran"))
            .collect();
        let verdicts = runs.into_iter().map(|r| r.verdict).collect();
        Ok(EvalReport::assemble(
            verdicts,
            self.config.snapshot(),
            partial,
            DEFAULT_BIN_COUNT,
        ))
    }

    /// Like [`run_batch`] but also writes per-question prompt and
    /// completion dumps under `dir`.
    pub fn run_batch_with_dumps(
        &self,
        questions: &Corpus,
        dir: &Path,
    ) -> Result<EvalReport, PipelineError> {
        std::fs::create_dir_all(dir)?;
        self.check_indexes()?;
        let report = {
            // Sequential so dump files pair with verdicts deterministically.
            let mut verdicts = Vec::new();
            let cost: u64 = if self.config.strategy.strategy.needs_draft() { 2 } else { 1 };
            let admitted = match self.config.budget {
                Some(budget) => ((budget / cost) as usize).min(questions.len()),
                None => questions.len(),
            };
            let partial = admitted < questions.len();
            for question in questions.iter().take(admitted) {
                let run = self.run_question(question);
                if let Some(text) = &run.pass1_prompt {
                    std::fs::write(dir.join(format!("{}.pass1.prompt.txt", question.id)), text)?;
                }
                if let Some(text) = &run.final_prompt {
                    std::fs::write(dir.join(format!("{}.prompt.txt", question.id)), text)?;
                }
                if let Some(text) = &run.completion_text {
                    std::fs::write(dir.join(format!("{}.completion.txt", question.id)), text)?;
                }
                verdicts.push(run.verdict);
            }
            EvalReport::assemble(verdicts, self.config.snapshot(), partial, DEFAULT_BIN_COUNT)
        };
        Ok(report)
    }
}

fn failed_verdict(
    question: &QuestionRecord,
    recall: Option<f64>,
    predicted_sparql: Option<String>,
    kind: FailureKind,
) -> QuestionVerdict {
    QuestionVerdict {
        id: question.id.clone(),
        predicted_sparql,
        predicted_answers: None,
        gold_answers: AnswerSet::from_values(question.answers.iter().cloned()),
        correct: false,
        f1: 0.0,
        em: false,
        relation_recall: recall,
        failure_kind: Some(kind),
    }
}

/// Parses, executes and scores one predicted query against the gold
/// answers.
pub fn score_prediction(
    kb: &KnowledgeBase,
    question: &QuestionRecord,
    recall: Option<f64>,
    predicted: Option<&str>,
) -> QuestionVerdict {
    let gold_answers = AnswerSet::from_values(question.answers.iter().cloned());
    let text = match predicted {
        Some(t) => t,
        None => return failed_verdict(question, recall, None, FailureKind::ParseError),
    };
    let parsed = match parse_sparql(text) {
        Ok(q) => q,
        Err(_) => {
            return failed_verdict(question, recall, Some(text.to_string()), FailureKind::ParseError)
        }
    };
    let answers = match execute(kb, &parsed) {
        Ok(a) => a,
        Err(_) => {
            return failed_verdict(question, recall, Some(text.to_string()), FailureKind::ExecError)
        }
    };
    let (correct, f1, em) = score_answers(&answers, &gold_answers);
    QuestionVerdict {
        id: question.id.clone(),
        predicted_sparql: Some(text.to_string()),
        predicted_answers: Some(answers),
        gold_answers,
        correct,
        f1,
        em,
        relation_recall: recall,
        failure_kind: if correct {
            None
        } else {
            Some(FailureKind::WrongAnswer)
        },
    }
}

/// Builds every index a configuration needs from the training corpus.
pub fn build_indexes_for(
    views: &[View],
    train: &Corpus,
    embedder: &Embedder,
    gazetteer: Option<&Gazetteer>,
) -> Result<StrategyIndexes, RetrievalError> {
    let mut indexes = StrategyIndexes::default();
    for view in views {
        let built = crate::retrieval::build_index(train, *view, embedder, gazetteer)?;
        match view {
            View::RawQuestion => indexes.raw = Some(built.index),
            View::AnonymizedQuestion => indexes.anonymized = Some(built.index),
            View::GoldSparql => indexes.sparql = Some(built.index),
        }
    }
    Ok(indexes)
}

/// One sweep cell: a full run at a given strategy and k.
pub struct SweepCell {
    pub strategy: Strategy,
    pub k: usize,
    pub report: EvalReport,
}

/// Runs the grid of strategies × k values, sharing one draft cache so
/// strategies with a common pass-1 configuration reuse drafts.
pub fn run_sweep(
    base: &RunConfig,
    strategies: &[Strategy],
    ks: &[usize],
    train: &Corpus,
    questions: &Corpus,
    indexes: &StrategyIndexes,
    kb: &KnowledgeBase,
    embedder: &Embedder,
    gazetteer: Option<&Gazetteer>,
    drafts: &DraftCache,
) -> Result<Vec<SweepCell>, PipelineError> {
    let mut cells = Vec::new();
    for &strategy in strategies {
        for &k in ks {
            let mut config = base.clone();
            config.strategy = StrategyConfig {
                strategy,
                k,
                exclude_ids: base.strategy.exclude_ids.clone(),
            };
            let runner = Runner::new(config, train, indexes, kb, embedder, gazetteer, drafts)?;
            let report = runner.run_batch(questions)?;
            cells.push(SweepCell {
                strategy,
                k,
                report,
            });
        }
    }
    Ok(cells)
}

/// Renders the sweep as a strategy-rows × k-columns accuracy matrix.
pub fn render_sweep_matrix(cells: &[SweepCell], ks: &[usize]) -> String {
    let mut out = String::from("strategy");
    for k in ks {
        out.push_str(&format!("\tk={k}"));
    }
    out.push('\n');
    let mut by_strategy: BTreeMap<&str, BTreeMap<usize, f64>> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for cell in cells {
        let name = cell.strategy.as_str();
        if !order.contains(&name) {
            order.push(name);
        }
        by_strategy
            .entry(name)
            .or_default()
            .insert(cell.k, cell.report.accuracy);
    }
    for name in order {
        out.push_str(name);
        for k in ks {
            match by_strategy.get(name).and_then(|m| m.get(k)) {
                Some(acc) => out.push_str(&format!("\t{acc:.3}")),
                None => out.push_str("\t-"),
            }
        }
        out.push('\n');
    }
    out
}

/// Standard run-directory filenames.
pub mod artifacts {
    pub const CONFIG: &str = "config.json";
    pub const VERDICTS: &str = "verdicts.jsonl";
    pub const SUMMARY: &str = "summary.txt";
    pub const RECALL_BINS: &str = "recall_bins.tsv";
    pub const DRAFTS: &str = "drafts.jsonl";
    pub const SWEEP: &str = "sweep.tsv";
    pub const PROMPTS_DIR: &str = "prompts";
}

/// Writes the report files into a run directory.
pub fn write_report(report: &EvalReport, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join(artifacts::CONFIG),
        serde_json::to_string_pretty(&report.config_snapshot).expect("snapshot serializes"),
    )?;
    std::fs::write(
        dir.join(artifacts::VERDICTS),
        crate::evaluation::write_verdicts_jsonl(&report.verdicts),
    )?;
    std::fs::write(
        dir.join(artifacts::SUMMARY),
        crate::evaluation::render_summary(report),
    )?;
    std::fs::write(
        dir.join(artifacts::RECALL_BINS),
        crate::evaluation::render_recall_bins_tsv(&report.recall_bins),
    )?;
    Ok(())
}

/// Convenience bundle for CLI and tests: owns what the [`Runner`]
/// borrows.
pub struct RunContext {
    pub train: Corpus,
    pub indexes: StrategyIndexes,
    pub kb: KnowledgeBase,
    pub embedder: Embedder,
    pub gazetteer: Option<Gazetteer>,
    pub drafts: DraftCache,
}

impl RunContext {
    /// Builds a context with auto-built indexes for the given strategy.
    pub fn prepare(
        config: &RunConfig,
        train: Corpus,
        kb: KnowledgeBase,
        gazetteer: Option<Gazetteer>,
    ) -> Result<Self, PipelineError> {
        let embedder = Embedder::new(config.provider.clone())
            .map_err(|e| PipelineError::Retrieval(RetrievalError::Embedding(e)))?;
        let views = views_for(config.strategy.strategy);
        let indexes = build_indexes_for(&views, &train, &embedder, gazetteer.as_ref())?;
        Ok(RunContext {
            train,
            indexes,
            kb,
            embedder,
            gazetteer,
            drafts: DraftCache::new(),
        })
    }

    pub fn runner(&self, config: RunConfig) -> Result<Runner<'_>, PipelineError> {
        Runner::new(
            config,
            &self.train,
            &self.indexes,
            &self.kb,
            &self.embedder,
            self.gazetteer.as_ref(),
            &self.drafts,
        )
    }
}

/// The full view set, for sweeps that cover every strategy.
pub fn all_views() -> [View; 3] {
    [
        View::RawQuestion,
        View::AnonymizedQuestion,
        View::GoldSparql,
    ]
}

/// Index views one strategy depends on (the two-pass strategies need
/// the anonymized view for their draft pass).
pub fn views_for(strategy: Strategy) -> Vec<View> {
    match strategy {
        Strategy::Raw => vec![View::RawQuestion],
        Strategy::Anonymized => vec![View::AnonymizedQuestion],
        Strategy::Sparql => vec![View::AnonymizedQuestion, View::GoldSparql],
        Strategy::Hybrid => vec![
            View::RawQuestion,
            View::AnonymizedQuestion,
            View::GoldSparql,
        ],
    }
}

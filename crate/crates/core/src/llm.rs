//! SPARQL completion providers: a remote chat-completions endpoint plus
//! deterministic local mocks for offline runs.
//!
//! Mocks are pure functions of (prompt, context). `gold_oracle` echoes
//! the context record's gold query; `relation_gate` returns it only when
//! the prompt's examples jointly cover every gold relation, which makes
//! downstream accuracy a function of relation recall by construction;
//! `fixed_map` replays canned responses keyed by prompt digest.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::QuestionRecord;
use crate::embedding::text_digest;
use crate::prompting::Prompt;
use crate::sparql::{extract_relations, parse_sparql};

/// Environment variable read for the remote API key. The value is sent
/// as a bearer token and never logged.
pub const API_KEY_ENV: &str = "KBQA_API_KEY";

/// The query `relation_gate` returns when coverage fails: it parses and
/// executes but can never match a benchmark answer.
pub const RELATION_GATE_WRONG_QUERY: &str =
    r#"SELECT ?x WHERE { ?x <__uncovered__> "__none__" . }"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlmKind {
    RemoteChat,
    GoldOracle,
    RelationGate,
    FixedMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    pub kind: LlmKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    pub temperature: f64,
    pub max_attempts: u32,
    pub timeout_ms: u64,
    /// Canned responses for `fixed_map`, one JSON object per line:
    /// `{"digest": <sha256 of rendered prompt>, "text": ...}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub responses_path: Option<PathBuf>,
    /// Upper bound on concurrent in-flight completions.
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn default_in_flight() -> usize {
    4
}

impl LlmConfig {
    pub fn mock(kind: LlmKind) -> Self {
        LlmConfig {
            kind,
            endpoint: None,
            model_name: None,
            temperature: 0.0,
            max_attempts: 3,
            timeout_ms: 30_000,
            responses_path: None,
            max_in_flight: default_in_flight(),
        }
    }

    pub fn remote(endpoint: String, model_name: String) -> Self {
        LlmConfig {
            kind: LlmKind::RemoteChat,
            endpoint: Some(endpoint),
            model_name: Some(model_name),
            ..LlmConfig::mock(LlmKind::RemoteChat)
        }
    }
}

/// One model response.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub extracted_sparql: Option<String>,
    pub provider_latency: Duration,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("llm config invalid: {0}")]
    InvalidConfig(String),
    #[error("request budget exhausted")]
    BudgetExhausted,
    #[error("{kind:?} mock requires a context record with gold SPARQL")]
    MissingContext { kind: LlmKind },
    #[error("no canned response for prompt digest {0}")]
    FixedMapMiss(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("responses file line {line}: {reason}")]
    ResponsesFormat { line: usize, reason: String },
    #[error("remote completion failed after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("remote returned status {0}")]
    Http(u16),
    #[error("remote response malformed: {0}")]
    ResponseShape(String),
}

/// Counting semaphore bounding in-flight requests.
struct InFlight {
    slots: Mutex<usize>,
    freed: Condvar,
}

impl InFlight {
    fn new(max: usize) -> Self {
        InFlight {
            slots: Mutex::new(max.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> InFlightGuard<'_> {
        let mut slots = self.slots.lock().expect("in-flight lock");
        while *slots == 0 {
            slots = self.freed.wait(slots).expect("in-flight wait");
        }
        *slots -= 1;
        InFlightGuard { owner: self }
    }
}

struct InFlightGuard<'a> {
    owner: &'a InFlight,
}

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        let mut slots = self.owner.slots.lock().expect("in-flight lock");
        *slots += 1;
        self.owner.freed.notify_one();
    }
}

/// Completion provider with retry, an in-flight bound, and an optional
/// per-run request budget.
pub struct LlmGateway {
    config: LlmConfig,
    budget: Option<u64>,
    used: AtomicU64,
    in_flight: InFlight,
    responses: HashMap<String, String>,
    client: Option<reqwest::blocking::Client>,
    api_key: Option<String>,
}

impl LlmGateway {
    pub fn new(config: LlmConfig, budget: Option<u64>) -> Result<Self, LlmError> {
        let client = match config.kind {
            LlmKind::RemoteChat => {
                if config.endpoint.is_none() || config.model_name.is_none() {
                    return Err(LlmError::InvalidConfig(
                        "remote_chat requires endpoint and model_name".into(),
                    ));
                }
                Some(
                    reqwest::blocking::Client::builder()
                        .timeout(Duration::from_millis(config.timeout_ms))
                        .build()
                        .map_err(|e| LlmError::InvalidConfig(e.to_string()))?,
                )
            }
            _ => None,
        };
        let responses = match (&config.kind, &config.responses_path) {
            (LlmKind::FixedMap, Some(path)) => load_responses(path)?,
            (LlmKind::FixedMap, None) => HashMap::new(),
            _ => HashMap::new(),
        };
        Ok(LlmGateway {
            in_flight: InFlight::new(config.max_in_flight),
            api_key: std::env::var(API_KEY_ENV).ok(),
            config,
            budget,
            used: AtomicU64::new(0),
            responses,
            client,
        })
    }

    /// Adds canned responses programmatically (fixed_map).
    pub fn with_responses(mut self, responses: HashMap<String, String>) -> Self {
        self.responses.extend(responses);
        self
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    /// Completions issued so far, successful or not.
    pub fn requests_used(&self) -> u64 {
        self.used.load(Ordering::SeqCst)
    }

    /// Obtains one completion for the prompt. Mocks consult `context`
    /// (the record under evaluation); the remote provider ignores it.
    pub fn complete(
        &self,
        prompt: &Prompt,
        context: Option<&QuestionRecord>,
    ) -> Result<Completion, LlmError> {
        if let Some(limit) = self.budget {
            let prior = self.used.fetch_add(1, Ordering::SeqCst);
            if prior >= limit {
                return Err(LlmError::BudgetExhausted);
            }
        } else {
            self.used.fetch_add(1, Ordering::SeqCst);
        }
        let _slot = self.in_flight.acquire();
        let started = Instant::now();
        let text = match self.config.kind {
            LlmKind::GoldOracle => self.gold_oracle(context)?,
            LlmKind::RelationGate => self.relation_gate(prompt, context)?,
            LlmKind::FixedMap => self.fixed_map(prompt)?,
            LlmKind::RemoteChat => self.remote_chat(prompt)?,
        };
        Ok(Completion {
            extracted_sparql: extract_sparql(&text),
            text,
            provider_latency: started.elapsed(),
        })
    }

    fn gold_oracle(&self, context: Option<&QuestionRecord>) -> Result<String, LlmError> {
        context
            .and_then(|r| r.gold_sparql.clone())
            .ok_or(LlmError::MissingContext {
                kind: LlmKind::GoldOracle,
            })
    }

    fn relation_gate(
        &self,
        prompt: &Prompt,
        context: Option<&QuestionRecord>,
    ) -> Result<String, LlmError> {
        let gold = context
            .and_then(|r| r.gold_sparql.as_deref())
            .ok_or(LlmError::MissingContext {
                kind: LlmKind::RelationGate,
            })?;
        let gold_relations = match parse_sparql(gold) {
            Ok(q) => extract_relations(&q),
            // An unparseable gold can never be covered.
            Err(_) => return Ok(RELATION_GATE_WRONG_QUERY.to_string()),
        };
        let mut covered = std::collections::BTreeSet::new();
        for (_, sparql) in &prompt.examples {
            if let Ok(q) = parse_sparql(sparql) {
                covered.extend(extract_relations(&q));
            }
        }
        if gold_relations.iter().all(|r| covered.contains(r)) {
            Ok(gold.to_string())
        } else {
            Ok(RELATION_GATE_WRONG_QUERY.to_string())
        }
    }

    fn fixed_map(&self, prompt: &Prompt) -> Result<String, LlmError> {
        let digest = text_digest(&prompt.rendered);
        self.responses
            .get(&digest)
            .cloned()
            .ok_or(LlmError::FixedMapMiss(digest))
    }

    fn remote_chat(&self, prompt: &Prompt) -> Result<String, LlmError> {
        #[derive(Serialize)]
        struct Message<'a> {
            role: &'static str,
            content: &'a str,
        }
        #[derive(Serialize)]
        struct Req<'a> {
            model: &'a str,
            messages: [Message<'a>; 1],
            temperature: f64,
        }
        #[derive(Deserialize)]
        struct RespMessage {
            content: String,
        }
        #[derive(Deserialize)]
        struct Choice {
            message: RespMessage,
        }
        #[derive(Deserialize)]
        struct Resp {
            choices: Vec<Choice>,
        }

        let client = self.client.as_ref().expect("remote client");
        let endpoint = self.config.endpoint.as_deref().expect("remote endpoint");
        let model = self.config.model_name.as_deref().expect("remote model");
        let body = Req {
            model,
            messages: [Message {
                role: "user",
                content: &prompt.rendered,
            }],
            temperature: self.config.temperature,
        };

        let mut last = String::new();
        for attempt in 0..self.config.max_attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(
                    50u64.saturating_mul(1 << attempt.min(6)),
                ));
            }
            let mut req = client.post(endpoint).json(&body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            match req.send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let parsed: Resp = resp
                            .json()
                            .map_err(|e| LlmError::ResponseShape(e.to_string()))?;
                        let choice = parsed
                            .choices
                            .into_iter()
                            .next()
                            .ok_or_else(|| LlmError::ResponseShape("no choices".into()))?;
                        return Ok(choice.message.content);
                    }
                    if status.is_server_error() {
                        last = format!("status {status}");
                        continue;
                    }
                    return Err(LlmError::Http(status.as_u16()));
                }
                Err(e) => {
                    last = e.to_string();
                }
            }
        }
        Err(LlmError::Exhausted {
            attempts: self.config.max_attempts,
            last,
        })
    }
}

fn load_responses(path: &std::path::Path) -> Result<HashMap<String, String>, LlmError> {
    #[derive(Deserialize)]
    struct Line {
        digest: String,
        text: String,
    }
    let content = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Line = serde_json::from_str(line).map_err(|e| LlmError::ResponsesFormat {
            line: idx + 1,
            reason: e.to_string(),
        })?;
        map.insert(rec.digest, rec.text);
    }
    Ok(map)
}

/// Pulls a SPARQL candidate out of free-form model output: strips a
/// leading `Output <n>:` label, keeps the content up to the first blank
/// line, and trims. `None` when nothing remains.
pub fn extract_sparql(text: &str) -> Option<String> {
    let t = strip_output_label(text.trim_start());
    let mut kept = Vec::new();
    for line in t.lines() {
        if line.trim().is_empty() {
            break;
        }
        kept.push(line);
    }
    let joined = kept.join("\n").trim().to_string();
    if joined.is_empty() {
        None
    } else {
        Some(joined)
    }
}

fn strip_output_label(t: &str) -> &str {
    let rest = match t.strip_prefix("Output") {
        Some(r) => r,
        None => return t,
    };
    let rest = rest.trim_start();
    let digits = rest.len() - rest.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 {
        return t;
    }
    match rest[digits..].strip_prefix(':') {
        Some(r) => r.trim_start(),
        None => t,
    }
}

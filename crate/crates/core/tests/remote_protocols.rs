//! Wire-level tests for the two remote protocols: the batch embedding
//! service and the chat-completions endpoint. A minimal in-process HTTP
//! responder stands in for the real services.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use kbqa_core::embedding::{Embedder, EmbeddingProviderSpec};
use kbqa_core::llm::{LlmConfig, LlmGateway};
use kbqa_core::prompting::build_prompt;
use kbqa_core::QuestionRecord;

/// One captured request: selected headers plus the body.
#[derive(Debug, Clone)]
struct Captured {
    authorization: Option<String>,
    body: serde_json::Value,
}

/// Serves the scripted `(status, body)` responses in order, one
/// connection each, capturing every request.
fn serve(responses: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Captured>>>, JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind test server");
    let addr = listener.local_addr().unwrap();
    let captured: Arc<Mutex<Vec<Captured>>> = Arc::new(Mutex::new(Vec::new()));
    let captured_in = Arc::clone(&captured);

    let handle = std::thread::spawn(move || {
        for (status, body) in responses {
            let (mut stream, _) = match listener.accept() {
                Ok(s) => s,
                Err(_) => return,
            };
            let mut buf = Vec::new();
            let mut chunk = [0u8; 4096];
            let (head_end, content_length) = loop {
                let n = stream.read(&mut chunk).expect("read request");
                buf.extend_from_slice(&chunk[..n]);
                if let Some(pos) = find_blank_line(&buf) {
                    let head = String::from_utf8_lossy(&buf[..pos]).to_lowercase();
                    let len = head
                        .lines()
                        .find_map(|l| l.strip_prefix("content-length:"))
                        .and_then(|v| v.trim().parse::<usize>().ok())
                        .unwrap_or(0);
                    break (pos + 4, len);
                }
                if n == 0 {
                    return;
                }
            };
            while buf.len() < head_end + content_length {
                let n = stream.read(&mut chunk).expect("read body");
                if n == 0 {
                    break;
                }
                buf.extend_from_slice(&chunk[..n]);
            }

            let head = String::from_utf8_lossy(&buf[..head_end]).to_string();
            let authorization = head
                .lines()
                .find(|l| l.to_lowercase().starts_with("authorization:"))
                .map(|l| l.splitn(2, ':').nth(1).unwrap().trim().to_string());
            let body_json: serde_json::Value =
                serde_json::from_slice(&buf[head_end..head_end + content_length])
                    .unwrap_or(serde_json::Value::Null);
            captured_in.lock().unwrap().push(Captured {
                authorization,
                body: body_json,
            });

            let reason = if status == 200 { "OK" } else { "ERR" };
            let response = format!(
                "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(response.as_bytes()).expect("write response");
        }
    });

    (format!("http://{addr}/"), captured, handle)
}

fn find_blank_line(buf: &[u8]) -> Option<usize> {
    buf.windows(4).position(|w| w == b"\r\n\r\n")
}

fn record(question: &str, sparql: Option<&str>) -> QuestionRecord {
    QuestionRecord {
        id: "q".into(),
        question: question.into(),
        gold_sparql: sparql.map(str::to_string),
        answers: Default::default(),
        topic_entity_id: None,
        entity_annotations: None,
    }
}

#[test]
fn embedding_protocol_batches_and_preserves_order() {
    let (url, captured, handle) = serve(vec![(
        200,
        r#"{"vectors": [[1.0, 0.0], [0.0, 1.0]]}"#.to_string(),
    )]);
    let embedder = Embedder::new(EmbeddingProviderSpec::remote(2, url)).unwrap();
    let out = embedder
        .embed_batch(&["first text".to_string(), "second text".to_string()])
        .unwrap();
    assert_eq!(out[0].values(), &[1.0, 0.0]);
    assert_eq!(out[1].values(), &[0.0, 1.0]);
    handle.join().unwrap();

    let reqs = captured.lock().unwrap();
    assert_eq!(reqs.len(), 1);
    assert_eq!(
        reqs[0].body,
        serde_json::json!({"texts": ["first text", "second text"]})
    );
}

#[test]
fn embedding_protocol_retries_on_5xx_then_succeeds() {
    let (url, captured, handle) = serve(vec![
        (500, r#"{"error": "transient"}"#.to_string()),
        (200, r#"{"vectors": [[0.5, 0.5]]}"#.to_string()),
    ]);
    let embedder = Embedder::new(EmbeddingProviderSpec::remote(2, url)).unwrap();
    let v = embedder.embed("needs a retry").unwrap();
    assert_eq!(v.values(), &[0.5, 0.5]);
    handle.join().unwrap();
    assert_eq!(captured.lock().unwrap().len(), 2);
}

#[test]
fn embedding_protocol_exhausts_attempts() {
    let (url, captured, handle) = serve(vec![
        (503, "{}".to_string()),
        (503, "{}".to_string()),
        (503, "{}".to_string()),
    ]);
    let mut spec = EmbeddingProviderSpec::remote(2, url);
    spec.max_attempts = 3;
    let embedder = Embedder::new(spec).unwrap();
    let err = embedder.embed("never works").unwrap_err();
    assert!(err.to_string().contains("3 attempts"), "got: {err}");
    handle.join().unwrap();
    assert_eq!(captured.lock().unwrap().len(), 3);
}

#[test]
fn embedding_protocol_rejects_wrong_dimension() {
    let (url, _captured, handle) = serve(vec![(
        200,
        r#"{"vectors": [[1.0, 2.0, 3.0]]}"#.to_string(),
    )]);
    let embedder = Embedder::new(EmbeddingProviderSpec::remote(2, url)).unwrap();
    let err = embedder.embed("text").unwrap_err();
    assert!(err.to_string().contains("dimension mismatch"), "got: {err}");
    handle.join().unwrap();
}

#[test]
fn embedding_protocol_normalize_flag() {
    let (url, _captured, handle) = serve(vec![(
        200,
        r#"{"vectors": [[3.0, 4.0]]}"#.to_string(),
    )]);
    let mut spec = EmbeddingProviderSpec::remote(2, url);
    spec.normalize = true;
    let embedder = Embedder::new(spec).unwrap();
    let v = embedder.embed("text").unwrap();
    assert!((v.values()[0] - 0.6).abs() < 1e-6);
    assert!((v.values()[1] - 0.8).abs() < 1e-6);
    handle.join().unwrap();
}

#[test]
fn chat_protocol_sends_prompt_model_and_temperature() {
    let (url, captured, handle) = serve(vec![(
        200,
        r#"{"choices": [{"message": {"role": "assistant", "content": "Output 1: ASK { ?a <p> ?b . }"}}]}"#
            .to_string(),
    )]);
    let mut config = LlmConfig::remote(url, "test-model-1".into());
    config.temperature = 0.7;
    let gateway = LlmGateway::new(config, None).unwrap();

    let q = record("what is the answer?", None);
    let prompt = build_prompt(&[], &q, "Translate to SPARQL.", false).unwrap();
    let completion = gateway.complete(&prompt, None).unwrap();
    assert_eq!(completion.text, "Output 1: ASK { ?a <p> ?b . }");
    assert_eq!(
        completion.extracted_sparql.as_deref(),
        Some("ASK { ?a <p> ?b . }")
    );
    handle.join().unwrap();

    let reqs = captured.lock().unwrap();
    assert_eq!(reqs.len(), 1);
    let body = &reqs[0].body;
    assert_eq!(body["model"], "test-model-1");
    assert_eq!(body["temperature"], 0.7);
    assert_eq!(body["messages"].as_array().unwrap().len(), 1);
    assert_eq!(body["messages"][0]["role"], "user");
    // The prompt text is sent exactly as rendered.
    assert_eq!(body["messages"][0]["content"], prompt.rendered.as_str());
}

#[test]
fn chat_protocol_retries_5xx_and_fails_fast_on_4xx() {
    let (url, captured, handle) = serve(vec![
        (500, "{}".to_string()),
        (
            200,
            r#"{"choices": [{"message": {"content": "SELECT ?x WHERE { ?a <p> ?x . }"}}]}"#.to_string(),
        ),
    ]);
    let gateway = LlmGateway::new(LlmConfig::remote(url, "m".into()), None).unwrap();
    let q = record("q?", None);
    let prompt = build_prompt(&[], &q, "I.", false).unwrap();
    let completion = gateway.complete(&prompt, None).unwrap();
    assert_eq!(completion.text, "SELECT ?x WHERE { ?a <p> ?x . }");
    handle.join().unwrap();
    assert_eq!(captured.lock().unwrap().len(), 2);

    // 4xx is not retryable.
    let (url, captured, handle) = serve(vec![(401, r#"{"error": "no key"}"#.to_string())]);
    let gateway = LlmGateway::new(LlmConfig::remote(url, "m".into()), None).unwrap();
    let err = gateway.complete(&prompt, None).unwrap_err();
    assert!(err.to_string().contains("401"), "got: {err}");
    handle.join().unwrap();
    assert_eq!(captured.lock().unwrap().len(), 1);
}

#[test]
fn chat_protocol_bearer_token_from_env() {
    // Single test touching the env var keeps it race-free here.
    std::env::set_var(kbqa_core::llm::API_KEY_ENV, "sk-test-123");
    let (url, captured, handle) = serve(vec![(
        200,
        r#"{"choices": [{"message": {"content": "ASK { ?a <p> ?b . }"}}]}"#.to_string(),
    )]);
    let gateway = LlmGateway::new(LlmConfig::remote(url, "m".into()), None).unwrap();
    let q = record("q?", None);
    let prompt = build_prompt(&[], &q, "I.", false).unwrap();
    gateway.complete(&prompt, None).unwrap();
    handle.join().unwrap();
    std::env::remove_var(kbqa_core::llm::API_KEY_ENV);

    let reqs = captured.lock().unwrap();
    assert_eq!(reqs[0].authorization.as_deref(), Some("Bearer sk-test-123"));
}

//! Text embedding providers and the similarity used by retrieval.
//!
//! Three provider kinds share one interface: a deterministic hashed
//! bag-of-tokens featurizer for offline runs, a precomputed lookup file,
//! and a remote batch-embedding service. Similarity is the negative
//! Euclidean distance, so 0 is maximal.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Fixed-dimension real vector for one text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f32>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self, EmbeddingError> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFiniteValue(*v));
        }
        Ok(EmbeddingVector { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}

/// Negative Euclidean distance; 0 iff the vectors are equal.
pub fn similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f32, EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let sq: f32 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(-sq.sqrt())
}

/// Which provider backs an [`Embedder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    HashFeatures,
    PrecomputedFile,
    RemoteService,
}

/// Provider configuration. `cache_path` is the lookup source for
/// `precomputed_file` and an optional write-through cache otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingProviderSpec {
    pub kind: ProviderKind,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_path: Option<PathBuf>,
    /// Attempts for remote calls; non-200 and transport errors retry
    /// with exponential backoff.
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    /// L2-normalize vectors returned by the remote service.
    #[serde(default)]
    pub normalize: bool,
}

fn default_attempts() -> u32 {
    3
}

impl EmbeddingProviderSpec {
    pub fn hash_features(dim: usize) -> Self {
        EmbeddingProviderSpec {
            kind: ProviderKind::HashFeatures,
            dim,
            endpoint: None,
            cache_path: None,
            max_attempts: default_attempts(),
            normalize: false,
        }
    }

    pub fn precomputed(dim: usize, path: PathBuf) -> Self {
        EmbeddingProviderSpec {
            kind: ProviderKind::PrecomputedFile,
            dim,
            endpoint: None,
            cache_path: Some(path),
            max_attempts: default_attempts(),
            normalize: false,
        }
    }

    pub fn remote(dim: usize, endpoint: String) -> Self {
        EmbeddingProviderSpec {
            kind: ProviderKind::RemoteService,
            dim,
            endpoint: Some(endpoint),
            cache_path: None,
            max_attempts: default_attempts(),
            normalize: false,
        }
    }

    /// Stable identifier used to key caches.
    pub fn provider_id(&self) -> String {
        let kind = match self.kind {
            ProviderKind::HashFeatures => "hash_features",
            ProviderKind::PrecomputedFile => "precomputed_file",
            ProviderKind::RemoteService => "remote_service",
        };
        match &self.endpoint {
            Some(e) => format!("{kind}:{}:{e}", self.dim),
            None => format!("{kind}:{}", self.dim),
        }
    }
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("vector contains non-finite value {0}")]
    NonFiniteValue(f32),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("provider spec invalid: {0}")]
    InvalidSpec(String),
    #[error("no precomputed vector for text digest {0}")]
    PrecomputedMiss(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("embedding cache line {line}: {reason}")]
    CacheFormat { line: usize, reason: String },
    #[error("remote embedding failed after {attempts} attempts: {last}")]
    RemoteExhausted { attempts: u32, last: String },
    #[error("remote embedding response malformed: {0}")]
    RemoteResponse(String),
}

/// SHA-256 of the text's UTF-8 bytes, lowercase hex. Keys cache files.
pub fn text_digest(text: &str) -> String {
    let bytes = Sha256::digest(text.as_bytes());
    let mut hex = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        write!(hex, "{b:02x}").expect("write to string");
    }
    hex
}

/// Lowercases and splits on non-alphanumeric characters; the hash
/// provider is a pure function of the resulting token multiset.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

const HASH_SEED: u64 = 0x6b62_7161_7631; // fixed; changing it invalidates caches

fn fnv1a(seed: u64, token: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for byte in token.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn hash_embed(dim: usize, text: &str) -> EmbeddingVector {
    let mut values = vec![0.0f32; dim];
    for token in tokenize(text) {
        let bucket = (fnv1a(HASH_SEED, &token) % dim as u64) as usize;
        values[bucket] += 1.0;
    }
    let norm: f32 = values.iter().map(|v| v * v).sum::<f32>().sqrt();
    if norm > 0.0 {
        for v in &mut values {
            *v /= norm;
        }
    }
    EmbeddingVector { values }
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    digest: String,
    vector: Vec<f32>,
}

/// Digest-keyed vector store in the precomputed-file format. Used both
/// as the lookup source for `precomputed_file` providers and as the
/// write-through cache for the others.
struct VectorFile {
    map: Mutex<HashMap<String, EmbeddingVector>>,
    append_to: Option<PathBuf>,
}

impl VectorFile {
    fn load(path: &Path, dim: usize) -> Result<HashMap<String, EmbeddingVector>, EmbeddingError> {
        let mut map = HashMap::new();
        if !path.exists() {
            return Ok(map);
        }
        let text = std::fs::read_to_string(path)?;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: CacheLine =
                serde_json::from_str(line).map_err(|e| EmbeddingError::CacheFormat {
                    line: idx + 1,
                    reason: e.to_string(),
                })?;
            if rec.vector.len() != dim {
                return Err(EmbeddingError::CacheFormat {
                    line: idx + 1,
                    reason: format!("expected dim {dim}, got {}", rec.vector.len()),
                });
            }
            map.insert(rec.digest, EmbeddingVector::new(rec.vector)?);
        }
        Ok(map)
    }

    fn get(&self, digest: &str) -> Option<EmbeddingVector> {
        self.map.lock().expect("cache lock").get(digest).cloned()
    }

    fn put(&self, digest: &str, vec: &EmbeddingVector) -> Result<(), EmbeddingError> {
        let mut map = self.map.lock().expect("cache lock");
        if map.contains_key(digest) {
            return Ok(());
        }
        map.insert(digest.to_string(), vec.clone());
        if let Some(path) = &self.append_to {
            let line = serde_json::to_string(&CacheLine {
                digest: digest.to_string(),
                vector: vec.values.clone(),
            })
            .expect("cache line serializes");
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

enum Backend {
    Hash,
    Precomputed,
    Remote {
        client: reqwest::blocking::Client,
        endpoint: String,
    },
}

/// A ready-to-use embedding provider built from an
/// [`EmbeddingProviderSpec`]. Safe to share across threads.
pub struct Embedder {
    spec: EmbeddingProviderSpec,
    backend: Backend,
    store: VectorFile,
}

impl Embedder {
    pub fn new(spec: EmbeddingProviderSpec) -> Result<Self, EmbeddingError> {
        let backend = match spec.kind {
            ProviderKind::HashFeatures => Backend::Hash,
            ProviderKind::PrecomputedFile => {
                if spec.cache_path.is_none() {
                    return Err(EmbeddingError::InvalidSpec(
                        "precomputed_file requires cache_path".into(),
                    ));
                }
                Backend::Precomputed
            }
            ProviderKind::RemoteService => {
                let endpoint = spec.endpoint.clone().ok_or_else(|| {
                    EmbeddingError::InvalidSpec("remote_service requires endpoint".into())
                })?;
                Backend::Remote {
                    client: reqwest::blocking::Client::builder()
                        .timeout(Duration::from_secs(30))
                        .build()
                        .map_err(|e| EmbeddingError::InvalidSpec(e.to_string()))?,
                    endpoint,
                }
            }
        };
        let map = match &spec.cache_path {
            Some(p) => VectorFile::load(p, spec.dim)?,
            None => HashMap::new(),
        };
        // The precomputed kind reads its file; it never appends to it.
        let append_to = match spec.kind {
            ProviderKind::PrecomputedFile => None,
            _ => spec.cache_path.clone(),
        };
        Ok(Embedder {
            spec,
            backend,
            store: VectorFile {
                map: Mutex::new(map),
                append_to,
            },
        })
    }

    pub fn spec(&self) -> &EmbeddingProviderSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
        Ok(self.embed_batch(std::slice::from_ref(&text.to_string()))?.remove(0))
    }

    /// Embeds several texts, batching remote calls. Output order matches
    /// input order.
    pub fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        let digests: Vec<String> = texts.iter().map(|t| text_digest(t)).collect();
        let mut out: Vec<Option<EmbeddingVector>> = digests
            .iter()
            .map(|d| self.store.get(d))
            .collect();

        let missing: Vec<usize> = (0..texts.len()).filter(|&i| out[i].is_none()).collect();
        if !missing.is_empty() {
            match &self.backend {
                Backend::Hash => {
                    for &i in &missing {
                        let v = hash_embed(self.spec.dim, &texts[i]);
                        self.store.put(&digests[i], &v)?;
                        out[i] = Some(v);
                    }
                }
                Backend::Precomputed => {
                    return Err(EmbeddingError::PrecomputedMiss(digests[missing[0]].clone()));
                }
                Backend::Remote { client, endpoint } => {
                    let batch: Vec<&str> = missing.iter().map(|&i| texts[i].as_str()).collect();
                    let vectors = self.remote_embed(client, endpoint, &batch)?;
                    for (&i, vec) in missing.iter().zip(vectors) {
                        self.store.put(&digests[i], &vec)?;
                        out[i] = Some(vec);
                    }
                }
            }
        }
        Ok(out.into_iter().map(|v| v.expect("filled above")).collect())
    }

    fn remote_embed(
        &self,
        client: &reqwest::blocking::Client,
        endpoint: &str,
        texts: &[&str],
    ) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        #[derive(Serialize)]
        struct Req<'a> {
            texts: &'a [&'a str],
        }
        #[derive(Deserialize)]
        struct Resp {
            vectors: Vec<Vec<f32>>,
        }

        let mut last = String::new();
        for attempt in 0..self.spec.max_attempts {
            if attempt > 0 {
                std::thread::sleep(backoff(attempt));
            }
            let result = client.post(endpoint).json(&Req { texts }).send();
            match result {
                Ok(resp) if resp.status().is_success() => {
                    let body: Resp = resp
                        .json()
                        .map_err(|e| EmbeddingError::RemoteResponse(e.to_string()))?;
                    if body.vectors.len() != texts.len() {
                        return Err(EmbeddingError::RemoteResponse(format!(
                            "expected {} vectors, got {}",
                            texts.len(),
                            body.vectors.len()
                        )));
                    }
                    let mut out = Vec::with_capacity(body.vectors.len());
                    for values in body.vectors {
                        if values.len() != self.spec.dim {
                            return Err(EmbeddingError::DimensionMismatch {
                                expected: self.spec.dim,
                                actual: values.len(),
                            });
                        }
                        let mut v = EmbeddingVector::new(values)?;
                        if self.spec.normalize {
                            let norm: f32 = v.values.iter().map(|x| x * x).sum::<f32>().sqrt();
                            if norm > 0.0 {
                                for x in &mut v.values {
                                    *x /= norm;
                                }
                            }
                        }
                        out.push(v);
                    }
                    return Ok(out);
                }
                Ok(resp) => {
                    last = format!("status {}", resp.status());
                }
                Err(e) => {
                    last = e.to_string();
                }
            }
        }
        Err(EmbeddingError::RemoteExhausted {
            attempts: self.spec.max_attempts,
            last,
        })
    }
}

fn backoff(attempt: u32) -> Duration {
    Duration::from_millis(50u64.saturating_mul(1 << attempt.min(6)))
}

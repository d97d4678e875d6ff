//! Prompt construction, code extraction, and a model gateway with
//! record/replay cassettes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{ContractKind, Task, TaskCategory};
use crate::sast::FindingCategory;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("{0} is not a feedback-loop category (expected M, A or N)")]
    UnsupportedCategory(FindingCategory),
    #[error("empty model response")]
    EmptyResponse,
    #[error("cassette has no entry for {key}")]
    CassetteMiss { key: String },
    #[error("endpoint failure: {0}")]
    Network(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimitExhausted { attempts: u32 },
    #[error("live generation requires a model client")]
    NoClient,
    #[error("cassette {path}: {reason}")]
    Cassette { path: PathBuf, reason: String },
    #[error("environment variable {0} is not set")]
    MissingApiKey(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StyleConstraint {
    ShorterLines,
    FewerLines,
}

impl StyleConstraint {
    pub const ALL: [StyleConstraint; 2] = [StyleConstraint::ShorterLines, StyleConstraint::FewerLines];

    pub fn instruction(self) -> &'static str {
        match self {
            StyleConstraint::ShorterLines => STYLE_SHORTER_LINES,
            StyleConstraint::FewerLines => STYLE_FEWER_LINES,
        }
    }
}

impl fmt::Display for StyleConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StyleConstraint::ShorterLines => "shorter-lines",
            StyleConstraint::FewerLines => "fewer-lines",
        })
    }
}

impl FromStr for StyleConstraint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "shorter-lines" | "shorterlines" => Ok(StyleConstraint::ShorterLines),
            "fewer-lines" | "fewerlines" => Ok(StyleConstraint::FewerLines),
            _ => Err(format!("unknown style constraint `{s}`")),
        }
    }
}

// Template wording. Reports quote these verbatim via `prompt_templates`.
const GEN_REQUEST: &str = "Write a complete, compilable C implementation. \
Return the whole C source file in a single ```c fenced code block.";
const GEN_HEADER_INTRO: &str = "Your implementation must conform to the following header file:";
const GEN_DECL_INTRO: &str = "Your implementation must define the following functions:";
const FIX_TEMPLATE: &str = "Make sure the generated code contains no {issue} issues.";
const STYLE_SHORTER_LINES: &str = "Use shorter line lengths in the generated code.";
const STYLE_FEWER_LINES: &str = "Use fewer lines of code in the generated code.";

/// The fixed instruction texts, for recording alongside results.
pub fn prompt_templates() -> BTreeMap<&'static str, String> {
    let mut m = BTreeMap::new();
    m.insert("generation_request", GEN_REQUEST.to_string());
    m.insert("header_intro", GEN_HEADER_INTRO.to_string());
    m.insert("declarations_intro", GEN_DECL_INTRO.to_string());
    m.insert("fix", FIX_TEMPLATE.to_string());
    m.insert("style_shorter_lines", STYLE_SHORTER_LINES.to_string());
    m.insert("style_fewer_lines", STYLE_FEWER_LINES.to_string());
    m
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum PromptRegime {
    Generation,
    Fix { category: FindingCategory },
    Style { constraint: StyleConstraint },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub task_id: String,
    pub regime: PromptRegime,
    pub text: String,
}

fn base_prompt(task: &Task) -> String {
    let mut text = task.description.trim_end().to_string();
    text.push_str("\n\n");
    let contract = &task.interface_contract;
    if task.category != TaskCategory::Leetcode && contract.kind != ContractKind::None {
        let intro = match contract.kind {
            ContractKind::HeaderFile => GEN_HEADER_INTRO,
            _ => GEN_DECL_INTRO,
        };
        text.push_str(intro);
        text.push_str("\n\n```c\n");
        text.push_str(&contract.text);
        if !contract.text.ends_with('\n') {
            text.push('\n');
        }
        text.push_str("```\n\n");
    }
    text.push_str(GEN_REQUEST);
    text
}

pub fn build_generation_prompt(task: &Task) -> PromptSpec {
    PromptSpec {
        task_id: task.id.clone(),
        regime: PromptRegime::Generation,
        text: base_prompt(task),
    }
}

pub fn build_fix_prompt(task: &Task, category: FindingCategory) -> Result<PromptSpec, GatewayError> {
    if category.loop_code().is_none() {
        return Err(GatewayError::UnsupportedCategory(category));
    }
    let sentence = FIX_TEMPLATE.replace("{issue}", category.issue_phrase());
    Ok(PromptSpec {
        task_id: task.id.clone(),
        regime: PromptRegime::Fix { category },
        text: format!("{}\n{}", base_prompt(task), sentence),
    })
}

pub fn build_style_prompt(task: &Task, constraint: StyleConstraint) -> PromptSpec {
    PromptSpec {
        task_id: task.id.clone(),
        regime: PromptRegime::Style { constraint },
        text: format!("{}\n{}", base_prompt(task), constraint.instruction()),
    }
}

/// Pulls the code out of a model response.
///
/// Picks the first fenced block labelled as C (or unlabelled); failing that,
/// the first fenced block of any language; failing that, the whole response
/// trimmed. An unclosed fence runs to the end of the response.
pub fn extract_code(raw: &str) -> Result<String, GatewayError> {
    let mut blocks: Vec<(String, Vec<&str>)> = Vec::new();
    let mut open: Option<(String, Vec<&str>)> = None;
    for line in raw.lines() {
        let t = line.trim();
        match open.as_mut() {
            Some((_, body)) => {
                if t.starts_with("```") && t.trim_start_matches('`').is_empty() {
                    blocks.push(open.take().unwrap());
                } else {
                    body.push(line);
                }
            }
            None => {
                if let Some(info) = t.strip_prefix("```") {
                    let lang = info
                        .trim_start_matches('`')
                        .split_whitespace()
                        .next()
                        .unwrap_or("")
                        .to_ascii_lowercase();
                    open = Some((lang, Vec::new()));
                }
            }
        }
    }
    if let Some(b) = open {
        blocks.push(b);
    }
    let is_c = |lang: &str| matches!(lang, "" | "c" | "h" | "c99" | "c11" | "c17");
    let chosen = blocks
        .iter()
        .find(|(lang, _)| is_c(lang))
        .or_else(|| blocks.first());
    let code = match chosen {
        Some((_, body)) => {
            let start = body
                .iter()
                .position(|l| !l.trim().is_empty())
                .unwrap_or(body.len());
            body[start..].join("\n").trim_end().to_string()
        }
        None => raw.trim().to_string(),
    };
    if code.is_empty() {
        return Err(GatewayError::EmptyResponse);
    }
    Ok(code)
}

/// Stable hash of the prompt text for a given model.
pub fn prompt_hash(model_id: &str, text: &str) -> String {
    let mut h = Sha256::new();
    h.update(model_id.as_bytes());
    h.update([0u8]);
    h.update(text.as_bytes());
    hex::encode(h.finalize())
}

fn cassette_key(hash: &str, trial: Option<u32>) -> String {
    match trial {
        Some(t) => format!("{hash}#{t}"),
        None => hash.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    Live,
    Record,
    Replay,
}

impl FromStr for GenerationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(GenerationMode::Live),
            "record" => Ok(GenerationMode::Record),
            "replay" => Ok(GenerationMode::Replay),
            _ => Err(format!("unknown mode `{s}` (expected live, record or replay)")),
        }
    }
}

/// How a record was obtained: from the endpoint or from a cassette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordSource {
    Live,
    Replay,
}

/// Decoding parameters sent with every request; `None` leaves the
/// endpoint default in place.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecodingParams {
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub response: String,
    pub timestamp: String,
    pub source: RecordSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub prompt: PromptSpec,
    pub prompt_hash: String,
    pub trial: Option<u32>,
    pub raw_response: String,
    pub extracted_source: String,
    pub model_id: String,
    pub timestamp: String,
    pub mode: RecordSource,
    pub params: DecodingParams,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub model_id: String,
    pub response: String,
    pub timestamp: String,
}

/// Prompt-hash keyed response store. Writes are serialized by a mutex.
#[derive(Debug, Default)]
pub struct Cassette {
    path: Option<PathBuf>,
    entries: Mutex<BTreeMap<String, CassetteEntry>>,
}

impl Cassette {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens a cassette file; a missing file starts an empty cassette that
    /// `save` will create.
    pub fn open(path: &Path) -> Result<Self, GatewayError> {
        let entries = match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| GatewayError::Cassette {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => {
                return Err(GatewayError::Cassette {
                    path: path.to_path_buf(),
                    reason: e.to_string(),
                })
            }
        };
        Ok(Cassette {
            path: Some(path.to_path_buf()),
            entries: Mutex::new(entries),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &str) -> Option<CassetteEntry> {
        self.entries.lock().unwrap().get(key).cloned()
    }

    pub fn insert(&self, key: String, entry: CassetteEntry) {
        self.entries.lock().unwrap().insert(key, entry);
    }

    /// Records a response for `prompt` (and optional trial index).
    pub fn put(&self, model_id: &str, prompt: &str, trial: Option<u32>, response: &str) {
        self.insert(
            cassette_key(&prompt_hash(model_id, prompt), trial),
            CassetteEntry {
                model_id: model_id.to_string(),
                response: response.to_string(),
                timestamp: "recorded".to_string(),
            },
        );
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn save(&self) -> Result<(), GatewayError> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        self.save_to(path)
    }

    pub fn save_to(&self, path: &Path) -> Result<(), GatewayError> {
        let entries = self.entries.lock().unwrap();
        let err = |reason: String| GatewayError::Cassette {
            path: path.to_path_buf(),
            reason,
        };
        let text = serde_json::to_string_pretty(&*entries).map_err(|e| err(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| err(e.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transient: {0}")]
    Transient(String),
    #[error("rate limited")]
    RateLimited,
    #[error("{0}")]
    Fatal(String),
}

/// A chat-completion style endpoint.
pub trait ModelClient: Send + Sync {
    fn complete(&self, prompt: &str, params: &DecodingParams) -> Result<String, ClientError>;
}

/// Adapts a closure into a client; used for mocks and scripted runs.
pub struct FnClient<F>(pub F);

impl<F> ModelClient for FnClient<F>
where
    F: Fn(&str) -> Result<String, ClientError> + Send + Sync,
{
    fn complete(&self, prompt: &str, _params: &DecodingParams) -> Result<String, ClientError> {
        (self.0)(prompt)
    }
}

/// OpenAI-compatible chat completions over HTTPS.
pub struct HttpClient {
    endpoint: String,
    model: String,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl HttpClient {
    pub fn new(endpoint: &str, model: &str, api_key_env: &str) -> Result<Self, GatewayError> {
        let api_key = std::env::var(api_key_env)
            .map_err(|_| GatewayError::MissingApiKey(api_key_env.to_string()))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| GatewayError::Network(e.to_string()))?;
        Ok(HttpClient {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            api_key,
            http,
        })
    }
}

impl ModelClient for HttpClient {
    fn complete(&self, prompt: &str, params: &DecodingParams) -> Result<String, ClientError> {
        let mut body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        if let Some(t) = params.temperature {
            body["temperature"] = t.into();
        }
        if let Some(m) = params.max_tokens {
            body["max_tokens"] = m.into();
        }
        let resp = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| ClientError::Transient(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 429 {
            return Err(ClientError::RateLimited);
        }
        if status.is_server_error() {
            return Err(ClientError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(ClientError::Fatal(format!("HTTP {status}: {text}")));
        }
        let json: serde_json::Value = resp
            .json()
            .map_err(|e| ClientError::Fatal(format!("bad response body: {e}")))?;
        json["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ClientError::Fatal("response has no message content".into()))
    }
}

/// Counting semaphore bounding concurrent endpoint calls.
struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        SlotGuard(self)
    }
}

struct SlotGuard<'a>(&'a Slots);

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

pub struct Gateway {
    pub model_id: String,
    pub mode: GenerationMode,
    pub params: DecodingParams,
    pub retries: u32,
    pub backoff: Duration,
    cassette: Cassette,
    client: Option<Box<dyn ModelClient>>,
    slots: Slots,
}

impl Gateway {
    /// Replay-only gateway: holds no client, so it cannot reach the network.
    pub fn replay(model_id: &str, cassette: Cassette) -> Self {
        Self::build(model_id, GenerationMode::Replay, cassette, None)
    }

    pub fn with_client(
        model_id: &str,
        mode: GenerationMode,
        cassette: Cassette,
        client: Box<dyn ModelClient>,
    ) -> Self {
        let client = (mode != GenerationMode::Replay).then_some(client);
        Self::build(model_id, mode, cassette, client)
    }

    fn build(
        model_id: &str,
        mode: GenerationMode,
        cassette: Cassette,
        client: Option<Box<dyn ModelClient>>,
    ) -> Self {
        Gateway {
            model_id: model_id.to_string(),
            mode,
            params: DecodingParams::default(),
            retries: 3,
            backoff: Duration::from_millis(500),
            cassette,
            client,
            slots: Slots {
                free: Mutex::new(4),
                cv: Condvar::new(),
            },
        }
    }

    pub fn set_max_in_flight(&mut self, n: usize) {
        *self.slots.free.lock().unwrap() = n.max(1);
    }

    pub fn cassette(&self) -> &Cassette {
        &self.cassette
    }

    pub fn generate(&self, prompt: &PromptSpec) -> Result<GenerationRecord, GatewayError> {
        self.generate_trial(prompt, None)
    }

    /// Generates one sample; `trial` distinguishes repeated samples of the
    /// same prompt in the cassette.
    pub fn generate_trial(
        &self,
        prompt: &PromptSpec,
        trial: Option<u32>,
    ) -> Result<GenerationRecord, GatewayError> {
        let hash = prompt_hash(&self.model_id, &prompt.text);
        let RawSample {
            response: raw,
            timestamp,
            source,
        } = self.sample(&prompt.text, trial)?;
        let extracted_source = extract_code(&raw)?;
        Ok(GenerationRecord {
            prompt: prompt.clone(),
            prompt_hash: hash,
            trial,
            raw_response: raw,
            extracted_source,
            model_id: self.model_id.clone(),
            timestamp,
            mode: source,
            params: self.params.clone(),
        })
    }

    /// Fetches one raw response without code extraction.
    pub fn sample(&self, text: &str, trial: Option<u32>) -> Result<RawSample, GatewayError> {
        let key = cassette_key(&prompt_hash(&self.model_id, text), trial);
        match self.mode {
            GenerationMode::Replay => {
                let entry = self
                    .cassette
                    .get(&key)
                    .ok_or_else(|| GatewayError::CassetteMiss { key: key.clone() })?;
                Ok(RawSample {
                    response: entry.response,
                    timestamp: entry.timestamp,
                    source: RecordSource::Replay,
                })
            }
            GenerationMode::Live | GenerationMode::Record => {
                let response = self.call(text)?;
                let timestamp = now_timestamp();
                if self.mode == GenerationMode::Record {
                    self.cassette.insert(
                        key,
                        CassetteEntry {
                            model_id: self.model_id.clone(),
                            response: response.clone(),
                            timestamp: timestamp.clone(),
                        },
                    );
                }
                Ok(RawSample {
                    response,
                    timestamp,
                    source: RecordSource::Live,
                })
            }
        }
    }

    fn call(&self, text: &str) -> Result<String, GatewayError> {
        let client = self.client.as_ref().ok_or(GatewayError::NoClient)?;
        let _slot = self.slots.acquire();
        let mut attempt = 0;
        loop {
            attempt += 1;
            match client.complete(text, &self.params) {
                Ok(r) => return Ok(r),
                Err(ClientError::Fatal(msg)) => return Err(GatewayError::Network(msg)),
                Err(e) if attempt > self.retries => {
                    return Err(match e {
                        ClientError::RateLimited => {
                            GatewayError::RateLimitExhausted { attempts: attempt }
                        }
                        other => GatewayError::Network(other.to_string()),
                    })
                }
                Err(e) => {
                    log::warn!("attempt {attempt} failed: {e}; retrying");
                    std::thread::sleep(self.backoff * 2u32.saturating_pow(attempt - 1));
                }
            }
        }
    }
}

fn now_timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

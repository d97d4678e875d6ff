//! Accumulated results of one evaluation run.
//!
//! A session holds no wall-clock durations or scratch paths, so a replay run
//! over the same corpus, cassette and configuration serializes to the same
//! bytes.

use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::build::CompileErrorClass;
use crate::config::Config;
use crate::corpus::{CodeArtifact, Difficulty, TaskCategory};
use crate::feedback::{LoopResult, PlanOutcome, StyleLoopResult};
use crate::fuzz::FuzzCell;
use crate::gateway::GenerationMode;
use crate::metrics::MetricsRecord;
use crate::parrot::SimilarityVerdict;
use crate::probe::ProbeRun;
use crate::sast::Finding;
use crate::validator::{EntryReport, ImportedVerdict, TestVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Corpus,
    Generate,
    Probe,
    Build,
    Validate,
    Fuzz,
    Analyze,
    Metrics,
    Parrot,
    Loop,
    StyleLoop,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    /// Artifact id (`task/origin`) or task id; `None` for session-wide stages.
    pub subject: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BuildOutcome {
    Ok,
    CompileError {
        classification: CompileErrorClass,
        /// First error line of the diagnostics.
        first_error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorOutcome {
    pub passed: usize,
    pub total: usize,
    pub failures: Vec<String>,
}

impl VectorOutcome {
    pub fn from_report(r: &EntryReport) -> Self {
        VectorOutcome {
            passed: r.passed(),
            total: r.total(),
            failures: r
                .entries
                .iter()
                .filter(|e| !e.passed)
                .map(|e| format!("#{}: {}", e.index, e.reason.as_deref().unwrap_or("")))
                .collect(),
        }
    }
}

/// Fuzz cell without run-specific paths or wall time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FuzzSummary {
    Counts {
        unique_hangs: u64,
        unique_crashes: u64,
        total_executions: u64,
        seconds: u64,
    },
    NotApplicable {
        reason: String,
    },
}

impl From<&FuzzCell> for FuzzSummary {
    fn from(c: &FuzzCell) -> Self {
        match c {
            FuzzCell::Counts(o) => FuzzSummary::Counts {
                unique_hangs: o.unique_hangs,
                unique_crashes: o.unique_crashes,
                total_executions: o.total_executions,
                seconds: o.duration.as_secs(),
            },
            FuzzCell::NotApplicable { reason } => FuzzSummary::NotApplicable {
                reason: reason.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactResult {
    pub artifact: CodeArtifact,
    pub build: Option<BuildOutcome>,
    /// Unit-suite verdict, else the verdict implied by the digest vectors.
    pub verdict: Option<TestVerdict>,
    pub vectors: Option<VectorOutcome>,
    pub fuzz: Option<FuzzSummary>,
    pub findings: Option<Vec<Finding>>,
    pub metrics: MetricsRecord,
}

impl ArtifactResult {
    pub fn id(&self) -> String {
        self.artifact.id()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task_id: String,
    pub category: TaskCategory,
    pub difficulty: Option<Difficulty>,
    pub human: Option<ArtifactResult>,
    /// `None` when generation failed.
    pub llm: Option<ArtifactResult>,
    /// Set when no stage produced a result for either artifact.
    pub incomplete: bool,
}

impl TaskResult {
    pub fn artifacts(&self) -> impl Iterator<Item = &ArtifactResult> {
        self.human.iter().chain(self.llm.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub model_id: String,
    pub mode: GenerationMode,
    pub corpus_hash: String,
    pub config: Config,
    pub prompt_templates: std::collections::BTreeMap<String, String>,
    pub tasks: Vec<TaskResult>,
    pub probes: Vec<ProbeRun>,
    pub parroting: Vec<SimilarityVerdict>,
    pub loop_plans: PlanOutcome,
    pub loops: Vec<LoopResult>,
    pub style: Vec<StyleLoopResult>,
    pub imported_verdicts: Vec<ImportedVerdict>,
    pub failures: Vec<StageFailure>,
}

impl Session {
    pub fn new(config: &Config, corpus_hash: &str) -> Self {
        Session {
            id: session_id(config, corpus_hash),
            model_id: config.gateway.model.clone(),
            mode: config.gateway.mode,
            corpus_hash: corpus_hash.to_string(),
            config: config.clone(),
            prompt_templates: crate::gateway::prompt_templates()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            tasks: Vec::new(),
            probes: Vec::new(),
            parroting: Vec::new(),
            loop_plans: PlanOutcome::default(),
            loops: Vec::new(),
            style: Vec::new(),
            imported_verdicts: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty() || self.tasks.iter().any(|t| t.incomplete)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("session serializes") + "\n"
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }
}

/// First 16 hex digits of SHA-256 over the configuration and corpus hash.
pub fn session_id(config: &Config, corpus_hash: &str) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config).expect("config serializes"));
    h.update(corpus_hash.as_bytes());
    hex::encode(h.finalize())[..16].to_string()
}

/// Removes run-specific text from a message: the scratch directory, process
/// ids in sanitizer banners, and raw addresses.
pub fn scrub(message: &str, work_dir: &Path) -> String {
    static PID: OnceLock<Regex> = OnceLock::new();
    static ADDR: OnceLock<Regex> = OnceLock::new();
    let pid = PID.get_or_init(|| Regex::new(r"==\d+==").unwrap());
    let addr = ADDR.get_or_init(|| Regex::new(r"0x[0-9a-fA-F]{6,}").unwrap());
    let mut s = message.to_string();
    let dir = work_dir.to_string_lossy();
    if !dir.is_empty() {
        s = s.replace(dir.as_ref(), "<work>");
    }
    let s = pid.replace_all(&s, "==PID==");
    addr.replace_all(&s, "0xADDR").into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_depend_on_inputs() {
        let c = Config::default();
        assert_eq!(session_id(&c, "a"), session_id(&c, "a"));
        assert_ne!(session_id(&c, "a"), session_id(&c, "b"));
        let mut d = c.clone();
        d.metrics.trim = 0.1;
        assert_ne!(session_id(&c, "a"), session_id(&d, "a"));
    }

    #[test]
    fn scrubbing() {
        let s = scrub(
            "==4242==ERROR: AddressSanitizer: heap-buffer-overflow on address 0x602000000014 in /tmp/w1/x.c",
            Path::new("/tmp/w1"),
        );
        assert_eq!(s, "==PID==ERROR: AddressSanitizer: heap-buffer-overflow on address 0xADDR in <work>/x.c");
    }

    #[test]
    fn json_round_trip() {
        let s = Session::new(&Config::default(), "h");
        let back: Session = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}

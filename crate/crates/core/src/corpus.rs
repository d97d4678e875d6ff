//! Task corpus: manifest loading, validation, and code artifacts.
//!
//! A corpus is a directory with a `manifest.toml` at its root. Each task
//! lives under `tasks/<id>/` and the manifest may override any of the
//! conventional asset paths:
//!
//! ```text
//! manifest.toml
//! tasks/<id>/description.txt
//! tasks/<id>/contract.h          (optional)
//! tasks/<id>/human.c
//! tasks/<id>/tests/suite.toml    (unit suite) + tests/*.c harness sources
//! tasks/<id>/vectors.tsv         (hash vectors)
//! tasks/<id>/roundtrip.tsv       (cipher round-trip inputs)
//! tasks/<id>/grammar.txt         (fuzz instruction grammar)
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gateway::StyleConstraint;
use crate::sast::FindingCategory;

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no manifest at {0}")]
    MissingManifest(PathBuf),
    #[error("failed to parse manifest: {0}")]
    Manifest(#[from] toml::de::Error),
    #[error("task `{task}`: cannot read {}: {source}", path.display())]
    Unreadable {
        task: String,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("duplicate task id `{0}`")]
    DuplicateId(String),
    #[error("task `{task}` is invalid: {}", violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidTask {
        task: String,
        violations: Vec<Violation>,
    },
    #[error("unknown task id `{0}`")]
    UnknownTask(String),
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskCategory {
    #[serde(alias = "leet_code")]
    Leetcode,
    #[serde(alias = "dsa")]
    DataStructureAlgorithm,
    #[serde(alias = "crypto")]
    Cryptographic,
}

impl TaskCategory {
    pub fn label(self) -> &'static str {
        match self {
            TaskCategory::Leetcode => "LeetCode",
            TaskCategory::DataStructureAlgorithm => "DataStructureAlgorithm",
            TaskCategory::Cryptographic => "Cryptographic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "easy" => Some(Difficulty::Easy),
            "medium" => Some(Difficulty::Medium),
            "hard" => Some(Difficulty::Hard),
            _ => None,
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "Easy",
            Difficulty::Medium => "Medium",
            Difficulty::Hard => "Hard",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractKind {
    HeaderFile,
    FunctionDeclarations,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceContract {
    pub kind: ContractKind,
    pub text: String,
    /// Corpus-relative path of the header, when the contract is a file.
    pub path: Option<PathBuf>,
}

impl InterfaceContract {
    pub fn none() -> Self {
        InterfaceContract {
            kind: ContractKind::None,
            text: String::new(),
            path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestAsset {
    /// Local judge suite plus the harness sources compiled with the artifact.
    UnitSuite { suite: PathBuf, harness: Vec<PathBuf> },
    FuzzGrammar { path: PathBuf },
    /// Digest vectors plus harness sources; the built binary hashes stdin
    /// and prints the hex digest.
    HashVectors { path: PathBuf, harness: Vec<PathBuf> },
    RoundTrip { path: PathBuf, harness: Vec<PathBuf> },
    /// Verdicts reported by an external judge, in the import CSV format.
    JudgeVerdicts { path: PathBuf },
}

impl TestAsset {
    fn paths(&self) -> Vec<&Path> {
        match self {
            TestAsset::UnitSuite { suite, harness } => std::iter::once(suite.as_path())
                .chain(harness.iter().map(PathBuf::as_path))
                .collect(),
            TestAsset::RoundTrip { path, harness } | TestAsset::HashVectors { path, harness } => {
                std::iter::once(path.as_path())
                    .chain(harness.iter().map(PathBuf::as_path))
                    .collect()
            }
            TestAsset::FuzzGrammar { path } | TestAsset::JudgeVerdicts { path } => {
                vec![path.as_path()]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub category: TaskCategory,
    pub title: String,
    /// Prompt text, used verbatim.
    pub description: String,
    pub difficulty: Option<Difficulty>,
    pub interface_contract: InterfaceContract,
    /// Corpus-relative path of the human reference implementation.
    pub reference_path: PathBuf,
    pub test_assets: Vec<TestAsset>,
}

impl Task {
    pub fn unit_suite(&self) -> Option<(&Path, &[PathBuf])> {
        self.test_assets.iter().find_map(|a| match a {
            TestAsset::UnitSuite { suite, harness } => Some((suite.as_path(), harness.as_slice())),
            _ => None,
        })
    }

    pub fn grammar(&self) -> Option<&Path> {
        self.test_assets.iter().find_map(|a| match a {
            TestAsset::FuzzGrammar { path } => Some(path.as_path()),
            _ => None,
        })
    }

    pub fn hash_vectors(&self) -> Option<(&Path, &[PathBuf])> {
        self.test_assets.iter().find_map(|a| match a {
            TestAsset::HashVectors { path, harness } => Some((path.as_path(), harness.as_slice())),
            _ => None,
        })
    }

    pub fn roundtrip(&self) -> Option<(&Path, &[PathBuf])> {
        self.test_assets.iter().find_map(|a| match a {
            TestAsset::RoundTrip { path, harness } => Some((path.as_path(), harness.as_slice())),
            _ => None,
        })
    }

    pub fn judge_verdicts(&self) -> Option<&Path> {
        self.test_assets.iter().find_map(|a| match a {
            TestAsset::JudgeVerdicts { path } => Some(path.as_path()),
            _ => None,
        })
    }
}

/// One rule broken by a task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.field, self.rule)
    }
}

fn violation(field: &str, rule: &str) -> Violation {
    Violation {
        field: field.to_string(),
        rule: rule.to_string(),
    }
}

/// Checks the task invariants; the result is empty iff all hold.
///
/// With a corpus root, the reference path must also resolve to a readable
/// file.
pub fn validate_task(task: &Task, root: Option<&Path>) -> Vec<Violation> {
    let mut out = Vec::new();
    if task.id.trim().is_empty() {
        out.push(violation("id", "empty"));
    }
    if task.description.trim().is_empty() {
        out.push(violation("description", "empty"));
    }
    if task.category == TaskCategory::Leetcode && task.difficulty.is_none() {
        out.push(violation("difficulty", "required for LeetCode tasks"));
    }
    match task.interface_contract.kind {
        ContractKind::None => {
            if task.category != TaskCategory::Leetcode {
                out.push(violation(
                    "interface_contract.kind",
                    "None is only permitted for LeetCode tasks",
                ));
            }
        }
        _ => {
            if task.interface_contract.text.trim().is_empty() {
                out.push(violation("interface_contract.text", "empty"));
            }
        }
    }
    if let Some(root) = root {
        let path = root.join(&task.reference_path);
        if std::fs::File::open(&path).is_err() {
            out.push(violation("reference_path", "does not resolve to a readable file"));
        }
    }
    out
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    #[serde(default, rename = "task")]
    tasks: Vec<ManifestTask>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestTask {
    id: String,
    category: TaskCategory,
    title: Option<String>,
    difficulty: Option<Difficulty>,
    description: Option<PathBuf>,
    reference: Option<PathBuf>,
    #[serde(default)]
    contract: Option<ManifestContract>,
    #[serde(default)]
    assets: ManifestAssets,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestContract {
    kind: ContractKind,
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestAssets {
    unit_suite: Option<PathBuf>,
    #[serde(default)]
    harness: Vec<PathBuf>,
    grammar: Option<PathBuf>,
    vectors: Option<PathBuf>,
    #[serde(default)]
    vectors_harness: Vec<PathBuf>,
    roundtrip: Option<PathBuf>,
    #[serde(default)]
    roundtrip_harness: Vec<PathBuf>,
    verdicts: Option<PathBuf>,
}

/// A loaded, validated corpus. Read-only after load.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub tasks: Vec<Task>,
}

impl Corpus {
    pub fn task(&self, id: &str) -> Result<&Task, CorpusError> {
        self.tasks
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| CorpusError::UnknownTask(id.to_string()))
    }

    pub fn resolve(&self, rel: &Path) -> PathBuf {
        self.root.join(rel)
    }

    pub fn read(&self, task: &Task, rel: &Path) -> Result<String, CorpusError> {
        let path = self.resolve(rel);
        std::fs::read_to_string(&path).map_err(|source| CorpusError::Unreadable {
            task: task.id.clone(),
            path,
            source,
        })
    }

    pub fn reference_source(&self, task: &Task) -> Result<String, CorpusError> {
        self.read(task, &task.reference_path)
    }

    pub fn human_artifact(&self, task: &Task) -> Result<CodeArtifact, CorpusError> {
        Ok(CodeArtifact {
            task_id: task.id.clone(),
            origin: Origin::Human,
            source_text: self.reference_source(task)?,
        })
    }

    /// SHA-256 over the manifest and every file it references, in order.
    pub fn content_hash(&self) -> Result<String, CorpusError> {
        let mut hasher = Sha256::new();
        let manifest = self.root.join(MANIFEST_FILE);
        hasher.update(std::fs::read(&manifest).map_err(|source| CorpusError::Io {
            path: manifest,
            source,
        })?);
        for task in &self.tasks {
            let mut paths = vec![task.reference_path.as_path()];
            if let Some(p) = &task.interface_contract.path {
                paths.push(p);
            }
            for asset in &task.test_assets {
                paths.extend(asset.paths());
            }
            for rel in paths {
                let path = self.resolve(rel);
                hasher.update(rel.to_string_lossy().as_bytes());
                hasher.update(std::fs::read(&path).map_err(|source| CorpusError::Io {
                    path: path.clone(),
                    source,
                })?);
            }
        }
        Ok(hex::encode(hasher.finalize()))
    }
}

/// Loads every task listed in `<root>/manifest.toml`, in manifest order.
pub fn load_corpus(root: &Path) -> Result<Corpus, CorpusError> {
    let manifest_path = root.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(CorpusError::MissingManifest(manifest_path));
    }
    let text = std::fs::read_to_string(&manifest_path).map_err(|source| CorpusError::Io {
        path: manifest_path.clone(),
        source,
    })?;
    let manifest: Manifest = toml::from_str(&text)?;

    let mut seen = HashSet::new();
    let mut tasks = Vec::with_capacity(manifest.tasks.len());
    for entry in manifest.tasks {
        if !seen.insert(entry.id.clone()) {
            return Err(CorpusError::DuplicateId(entry.id));
        }
        let task = resolve_task(root, entry)?;
        let violations = validate_task(&task, Some(root));
        if !violations.is_empty() {
            return Err(CorpusError::InvalidTask {
                task: task.id,
                violations,
            });
        }
        tasks.push(task);
    }
    Ok(Corpus {
        root: root.to_path_buf(),
        tasks,
    })
}

fn resolve_task(root: &Path, entry: ManifestTask) -> Result<Task, CorpusError> {
    let dir = Path::new("tasks").join(&entry.id);
    let read = |rel: &Path| -> Result<String, CorpusError> {
        let path = root.join(rel);
        std::fs::read_to_string(&path).map_err(|source| CorpusError::Unreadable {
            task: entry.id.clone(),
            path,
            source,
        })
    };
    let require = |rel: PathBuf| -> Result<PathBuf, CorpusError> {
        let path = root.join(&rel);
        match std::fs::metadata(&path) {
            Ok(_) => Ok(rel),
            Err(source) => Err(CorpusError::Unreadable {
                task: entry.id.clone(),
                path,
                source,
            }),
        }
    };

    let description_path = entry
        .description
        .clone()
        .unwrap_or_else(|| dir.join("description.txt"));
    let description = read(&description_path)?;

    let reference_path = entry.reference.clone().unwrap_or_else(|| dir.join("human.c"));
    // Surface unreadable references as load errors naming task and path.
    read(&reference_path)?;

    let default_header = dir.join("contract.h");
    let interface_contract = match &entry.contract {
        Some(c) if c.kind == ContractKind::None => InterfaceContract::none(),
        Some(c) => {
            let path = c.path.clone().unwrap_or_else(|| default_header.clone());
            InterfaceContract {
                kind: c.kind,
                text: read(&path)?,
                path: Some(path),
            }
        }
        None if root.join(&default_header).is_file() => InterfaceContract {
            kind: ContractKind::HeaderFile,
            text: read(&default_header)?,
            path: Some(default_header),
        },
        None => InterfaceContract::none(),
    };

    let mut assets = Vec::new();
    let a = entry.assets;
    let optional = |explicit: Option<PathBuf>, conventional: PathBuf| -> Option<PathBuf> {
        explicit.or_else(|| root.join(&conventional).is_file().then_some(conventional))
    };
    if let Some(suite) = optional(a.unit_suite, dir.join("tests/suite.toml")) {
        let harness = if a.harness.is_empty() {
            default_harness(root, &dir.join("tests"))
        } else {
            a.harness
        };
        let harness = harness.into_iter().map(&require).collect::<Result<_, _>>()?;
        assets.push(TestAsset::UnitSuite {
            suite: require(suite)?,
            harness,
        });
    }
    if let Some(path) = optional(a.grammar, dir.join("grammar.txt")) {
        assets.push(TestAsset::FuzzGrammar {
            path: require(path)?,
        });
    }
    if let Some(path) = optional(a.vectors, dir.join("vectors.tsv")) {
        let harness = a
            .vectors_harness
            .into_iter()
            .map(&require)
            .collect::<Result<_, _>>()?;
        assets.push(TestAsset::HashVectors {
            path: require(path)?,
            harness,
        });
    }
    if let Some(path) = optional(a.roundtrip, dir.join("roundtrip.tsv")) {
        let harness = a
            .roundtrip_harness
            .into_iter()
            .map(&require)
            .collect::<Result<_, _>>()?;
        assets.push(TestAsset::RoundTrip {
            path: require(path)?,
            harness,
        });
    }
    if let Some(path) = a.verdicts {
        assets.push(TestAsset::JudgeVerdicts {
            path: require(path)?,
        });
    }

    Ok(Task {
        title: entry.title.unwrap_or_else(|| entry.id.clone()),
        id: entry.id,
        category: entry.category,
        description,
        difficulty: entry.difficulty,
        interface_contract,
        reference_path,
        test_assets: assets,
    })
}

/// `*.c` and `*.h` files in the tests directory, sorted by name.
fn default_harness(root: &Path, tests_dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(root.join(tests_dir))
        .into_iter()
        .flatten()
        .flatten()
        .filter(|e| e.path().extension().is_some_and(|x| x == "c" || x == "h"))
        .map(|e| tests_dir.join(e.file_name()))
        .collect();
    files.sort();
    files
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RegenerationTarget {
    Category { category: FindingCategory },
    Style { constraint: StyleConstraint },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Human,
    Llm {
        model_id: String,
        prompt_hash: String,
        timestamp: String,
    },
    LlmRegenerated {
        round: u32,
        target: RegenerationTarget,
        model_id: String,
        prompt_hash: String,
    },
}

impl Origin {
    /// Short label used for report columns: `human`, `llm`, `llm-r<round>`.
    pub fn label(&self) -> String {
        match self {
            Origin::Human => "human".to_string(),
            Origin::Llm { .. } => "llm".to_string(),
            Origin::LlmRegenerated { round, .. } => format!("llm-r{round}"),
        }
    }

    pub fn is_llm(&self) -> bool {
        !matches!(self, Origin::Human)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeArtifact {
    pub task_id: String,
    pub origin: Origin,
    pub source_text: String,
}

impl CodeArtifact {
    pub fn id(&self) -> String {
        format!("{}/{}", self.task_id, self.origin.label())
    }
}

//! Static-analysis adapter: runs the Clang static analyzer with the default
//! and experimental checker groups, parses its SARIF output, and maps each
//! diagnostic into a fixed issue taxonomy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyzerError {
    #[error("analyzer backend `{0}` not found")]
    BackendMissing(String),
    #[error("analyzer exited with {code:?}: {stderr}")]
    BackendFailed { code: Option<i32>, stderr: String },
    #[error("malformed analyzer output: {0}")]
    Parse(String),
    #[error("no recorded findings for source {0}")]
    NotRecorded(String),
    #[error("pattern table line {line}: {reason}")]
    Pattern { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Issue taxonomy. `Other` collects diagnostics no pattern recognizes.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum FindingCategory {
    MemoryLeak,
    NullDereference,
    GarbageAssignedValue,
    MallocOverflow,
    TaintPropagation,
    DivisionByZero,
    StackAddressEscape,
    UndefinedBinaryOperator,
    MallocInvalidTypeConversion,
    GarbageReturnValue,
    UninitializedCallArgument,
    ArrayIndexOutOfBounds,
    ImplicitConversion,
    NestedFunctionUnsupported,
    CastNonStructToStruct,
    CStringOutOfBounds,
    Other,
}

impl FindingCategory {
    /// The sixteen named categories, in report row order.
    pub const TAXONOMY: [FindingCategory; 16] = [
        FindingCategory::MemoryLeak,
        FindingCategory::NullDereference,
        FindingCategory::GarbageAssignedValue,
        FindingCategory::MallocOverflow,
        FindingCategory::TaintPropagation,
        FindingCategory::DivisionByZero,
        FindingCategory::StackAddressEscape,
        FindingCategory::UndefinedBinaryOperator,
        FindingCategory::MallocInvalidTypeConversion,
        FindingCategory::GarbageReturnValue,
        FindingCategory::UninitializedCallArgument,
        FindingCategory::ArrayIndexOutOfBounds,
        FindingCategory::ImplicitConversion,
        FindingCategory::NestedFunctionUnsupported,
        FindingCategory::CastNonStructToStruct,
        FindingCategory::CStringOutOfBounds,
    ];

    /// Categories targeted by the fix-prompt feedback loop.
    pub const LOOP_CATEGORIES: [FindingCategory; 3] = [
        FindingCategory::MallocOverflow,
        FindingCategory::ArrayIndexOutOfBounds,
        FindingCategory::NullDereference,
    ];

    pub fn all() -> impl Iterator<Item = FindingCategory> {
        Self::TAXONOMY
            .into_iter()
            .chain(std::iter::once(FindingCategory::Other))
    }

    /// Human-readable row label.
    pub fn label(self) -> &'static str {
        use FindingCategory::*;
        match self {
            MemoryLeak => "Memory leak",
            NullDereference => "Null pointer dereference",
            GarbageAssignedValue => "Assigned value is garbage or undefined",
            MallocOverflow => "Malloc overflow",
            TaintPropagation => "Taint propagation",
            DivisionByZero => "Division by zero",
            StackAddressEscape => "Address of stack memory returned to caller",
            UndefinedBinaryOperator => "Undefined binary operator",
            MallocInvalidTypeConversion => "Result of malloc converted to invalid type",
            GarbageReturnValue => "Undefined or garbage value returned to caller",
            UninitializedCallArgument => "Function call argument is an uninitialized value",
            ArrayIndexOutOfBounds => "Array index out of bounds",
            ImplicitConversion => "Implicit conversion",
            NestedFunctionUnsupported => "Nested function is not supported",
            CastNonStructToStruct => "Cast from non struct to struct",
            CStringOutOfBounds => "C string out of bounds",
            Other => "Other",
        }
    }

    /// Lower-case phrase used inside fix prompts.
    pub fn issue_phrase(self) -> &'static str {
        use FindingCategory::*;
        match self {
            MallocOverflow => "malloc overflow",
            ArrayIndexOutOfBounds => "array index out of bounds",
            NullDereference => "null dereference",
            MemoryLeak => "memory leak",
            _ => self.label(),
        }
    }

    /// Column code for feedback-loop tables (`M`, `A`, `N`).
    pub fn loop_code(self) -> Option<&'static str> {
        match self {
            FindingCategory::MallocOverflow => Some("M"),
            FindingCategory::ArrayIndexOutOfBounds => Some("A"),
            FindingCategory::NullDereference => Some("N"),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        format!("{self:?}")
    }
}

impl fmt::Display for FindingCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for FindingCategory {
    type Err = String;

    /// Accepts the variant name (`MallocOverflow`), a kebab/snake slug
    /// (`malloc-overflow`), or a loop code (`M`, `A`, `N`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        if s.trim().len() == 1 {
            return match s.trim() {
                "M" | "m" => Ok(FindingCategory::MallocOverflow),
                "A" | "a" => Ok(FindingCategory::ArrayIndexOutOfBounds),
                "N" | "n" => Ok(FindingCategory::NullDereference),
                _ => Err(format!("unknown finding category `{s}`")),
            };
        }
        FindingCategory::all()
            .find(|c| c.name().to_ascii_lowercase() == key)
            .ok_or_else(|| format!("unknown finding category `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub category: FindingCategory,
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub message: String,
    pub checker: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckerGroup {
    Default,
    CoreExperimental,
    SecurityExperimental,
    UnixExperimental,
}

impl CheckerGroup {
    fn package(self) -> Option<&'static str> {
        match self {
            CheckerGroup::Default => None,
            CheckerGroup::CoreExperimental => Some("alpha.core"),
            CheckerGroup::SecurityExperimental => Some("alpha.security"),
            CheckerGroup::UnixExperimental => Some("alpha.unix"),
        }
    }
}

/// Enabled checker groups. `Default` is always part of the set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzerConfig {
    groups: BTreeSet<CheckerGroup>,
}

impl AnalyzerConfig {
    pub fn new(groups: impl IntoIterator<Item = CheckerGroup>) -> Self {
        let mut groups: BTreeSet<_> = groups.into_iter().collect();
        groups.insert(CheckerGroup::Default);
        AnalyzerConfig { groups }
    }

    pub fn default_only() -> Self {
        Self::new([])
    }

    pub fn groups(&self) -> &BTreeSet<CheckerGroup> {
        &self.groups
    }

    /// `-analyzer-checker=` list for the experimental packages.
    fn checker_arg(&self) -> Option<String> {
        let pkgs: Vec<&str> = self.groups.iter().filter_map(|g| g.package()).collect();
        (!pkgs.is_empty()).then(|| pkgs.join(","))
    }
}

impl Default for AnalyzerConfig {
    /// Default checkers plus all three experimental groups.
    fn default() -> Self {
        Self::new([
            CheckerGroup::CoreExperimental,
            CheckerGroup::SecurityExperimental,
            CheckerGroup::UnixExperimental,
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PatternField {
    Checker,
    Message,
}

#[derive(Debug, Clone)]
struct PatternRule {
    category: FindingCategory,
    field: PatternField,
    needle: String,
}

/// Ordered category rules; the first matching rule wins.
#[derive(Debug, Clone)]
pub struct PatternTable {
    rules: Vec<PatternRule>,
}

const DEFAULT_PATTERNS: &str = include_str!("../data/sast_patterns.tsv");

impl PatternTable {
    pub fn parse(text: &str) -> Result<Self, AnalyzerError> {
        let mut rules = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.splitn(3, '\t').collect();
            let err = |reason: String| AnalyzerError::Pattern {
                line: idx + 1,
                reason,
            };
            if cols.len() != 3 || cols[2].is_empty() {
                return Err(err("expected category<TAB>field<TAB>substring".into()));
            }
            let category = cols[0].parse::<FindingCategory>().map_err(err)?;
            let field = match cols[1] {
                "checker" => PatternField::Checker,
                "message" => PatternField::Message,
                other => return Err(err(format!("unknown field `{other}`"))),
            };
            rules.push(PatternRule {
                category,
                field,
                needle: cols[2].to_ascii_lowercase(),
            });
        }
        Ok(PatternTable { rules })
    }

    pub fn load(path: &Path) -> Result<Self, AnalyzerError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn categorize(&self, checker: &str, message: &str) -> FindingCategory {
        let checker = checker.to_ascii_lowercase();
        let message = message.to_ascii_lowercase();
        self.rules
            .iter()
            .find(|r| match r.field {
                PatternField::Checker => checker.contains(&r.needle),
                PatternField::Message => message.contains(&r.needle),
            })
            .map(|r| r.category)
            .unwrap_or(FindingCategory::Other)
    }
}

impl Default for PatternTable {
    fn default() -> Self {
        Self::parse(DEFAULT_PATTERNS).expect("bundled pattern table is valid")
    }
}

fn default_table() -> &'static PatternTable {
    static TABLE: OnceLock<PatternTable> = OnceLock::new();
    TABLE.get_or_init(PatternTable::default)
}

/// Maps a diagnostic through the bundled pattern table.
pub fn map_category(checker: &str, message: &str) -> FindingCategory {
    default_table().categorize(checker, message)
}

/// Source handed to an [`Analyzer`].
#[derive(Debug, Clone)]
pub struct AnalysisInput {
    /// Logical file name recorded in findings.
    pub name: String,
    pub source: String,
    pub include_dirs: Vec<PathBuf>,
}

pub trait Analyzer: Send + Sync {
    fn analyze(&self, input: &AnalysisInput) -> Result<Vec<Finding>, AnalyzerError>;
}

/// Clang static analyzer backend.
#[derive(Debug, Clone)]
pub struct ClangAnalyzer {
    pub clang: PathBuf,
    pub config: AnalyzerConfig,
    pub patterns: PatternTable,
    pub extra_args: Vec<String>,
}

impl Default for ClangAnalyzer {
    fn default() -> Self {
        ClangAnalyzer {
            clang: PathBuf::from("clang"),
            config: AnalyzerConfig::default(),
            patterns: PatternTable::default(),
            extra_args: vec!["-std=gnu11".into()],
        }
    }
}

impl ClangAnalyzer {
    /// Analyzes the file at `path`; findings carry `path` as given.
    pub fn analyze_path(
        &self,
        path: &Path,
        include_dirs: &[PathBuf],
    ) -> Result<Vec<Finding>, AnalyzerError> {
        let work = tempfile::tempdir()?;
        let sarif_path = work.path().join("out.sarif");
        let mut cmd = Command::new(&self.clang);
        cmd.arg("--analyze")
            .arg("--analyzer-output")
            .arg("sarif")
            .arg("-o")
            .arg(&sarif_path)
            .args(&self.extra_args);
        if let Some(list) = self.config.checker_arg() {
            cmd.arg("-Xclang").arg(format!("-analyzer-checker={list}"));
        }
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            cmd.arg("-I").arg(parent);
        }
        for dir in include_dirs {
            cmd.arg("-I").arg(dir);
        }
        cmd.arg(path);
        let output = cmd.output().map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => {
                AnalyzerError::BackendMissing(self.clang.display().to_string())
            }
            _ => AnalyzerError::Io(e),
        })?;
        let logical = path.display().to_string();
        let stderr = String::from_utf8_lossy(&output.stderr);

        if !output.status.success() {
            let errors = parse_frontend_errors(&stderr, &logical, &self.patterns);
            if errors.is_empty() {
                return Err(AnalyzerError::BackendFailed {
                    code: output.status.code(),
                    stderr: stderr.into_owned(),
                });
            }
            return Ok(errors);
        }
        let text = match std::fs::read_to_string(&sarif_path) {
            Ok(t) => t,
            // No report is written for a translation unit without diagnostics.
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        parse_sarif(&text, &logical, &self.patterns)
    }
}

impl Analyzer for ClangAnalyzer {
    fn analyze(&self, input: &AnalysisInput) -> Result<Vec<Finding>, AnalyzerError> {
        let work = tempfile::tempdir()?;
        // The compiler picks the language from the extension.
        let path = match Path::new(&input.name).file_name() {
            Some(f) if Path::new(f).extension().is_some_and(|e| e == "c") => work.path().join(f),
            Some(f) => work.path().join(f).with_extension("c"),
            None => work.path().join("input.c"),
        };
        std::fs::write(&path, &input.source)?;
        let mut findings = self.analyze_path(&path, &input.include_dirs)?;
        for f in &mut findings {
            f.file = input.name.clone();
        }
        Ok(findings)
    }
}

#[derive(Deserialize)]
struct SarifLog {
    #[serde(default)]
    runs: Vec<SarifRun>,
}

#[derive(Deserialize)]
struct SarifRun {
    #[serde(default)]
    results: Vec<SarifResult>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SarifResult {
    rule_id: Option<String>,
    message: SarifMessage,
    #[serde(default)]
    locations: Vec<SarifLocation>,
}

#[derive(Deserialize)]
struct SarifMessage {
    #[serde(default)]
    text: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SarifLocation {
    physical_location: Option<SarifPhysical>,
}

#[derive(Deserialize)]
struct SarifPhysical {
    region: Option<SarifRegion>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SarifRegion {
    start_line: Option<u32>,
    start_column: Option<u32>,
}

/// Parses a SARIF 2.1 log into findings attributed to `file`.
pub fn parse_sarif(
    text: &str,
    file: &str,
    patterns: &PatternTable,
) -> Result<Vec<Finding>, AnalyzerError> {
    let log: SarifLog =
        serde_json::from_str(text).map_err(|e| AnalyzerError::Parse(e.to_string()))?;
    let mut findings = Vec::new();
    for result in log.runs.into_iter().flat_map(|r| r.results) {
        let checker = result.rule_id.unwrap_or_default();
        let region = result
            .locations
            .into_iter()
            .find_map(|l| l.physical_location.and_then(|p| p.region));
        let (line, column) = region
            .map(|r| (r.start_line.unwrap_or(1), r.start_column.unwrap_or(1)))
            .unwrap_or((1, 1));
        findings.push(Finding {
            category: patterns.categorize(&checker, &result.message.text),
            file: file.to_string(),
            line: line.max(1),
            column,
            message: result.message.text,
            checker,
        });
    }
    findings.sort();
    Ok(findings)
}

/// Frontend `error:` diagnostics from compiler stderr, as findings.
pub fn parse_frontend_errors(stderr: &str, file: &str, patterns: &PatternTable) -> Vec<Finding> {
    let mut out = Vec::new();
    for line in stderr.lines() {
        let Some((loc, message)) = line.split_once(": error: ") else {
            continue;
        };
        let mut parts = loc.rsplitn(3, ':');
        let col = parts.next().and_then(|c| c.parse::<u32>().ok());
        let ln = parts.next().and_then(|l| l.parse::<u32>().ok());
        let (Some(column), Some(line_no)) = (col, ln) else {
            continue;
        };
        let checker = "clang.frontend";
        out.push(Finding {
            category: patterns.categorize(checker, message),
            file: file.to_string(),
            line: line_no.max(1),
            column,
            message: message.to_string(),
            checker: checker.to_string(),
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CassetteMode {
    Record,
    Replay,
}

/// Pinned analyzer results keyed by source content hash.
///
/// Replay never invokes a backend; Record runs the inner analyzer and stores
/// what it returned.
pub struct RecordedAnalyzer {
    mode: CassetteMode,
    inner: Option<Box<dyn Analyzer>>,
    entries: Mutex<BTreeMap<String, Vec<Finding>>>,
}

impl RecordedAnalyzer {
    pub fn replay(entries: BTreeMap<String, Vec<Finding>>) -> Self {
        RecordedAnalyzer {
            mode: CassetteMode::Replay,
            inner: None,
            entries: Mutex::new(entries),
        }
    }

    pub fn record(inner: Box<dyn Analyzer>) -> Self {
        RecordedAnalyzer {
            mode: CassetteMode::Record,
            inner: Some(inner),
            entries: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn load(path: &Path) -> Result<Self, AnalyzerError> {
        let text = std::fs::read_to_string(path)?;
        let entries =
            serde_json::from_str(&text).map_err(|e| AnalyzerError::Parse(e.to_string()))?;
        Ok(Self::replay(entries))
    }

    pub fn save(&self, path: &Path) -> Result<(), AnalyzerError> {
        let entries = self.entries.lock().unwrap();
        let text = serde_json::to_string_pretty(&*entries)
            .map_err(|e| AnalyzerError::Parse(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn source_key(source: &str) -> String {
        hex::encode(Sha256::digest(source.as_bytes()))
    }

    pub fn insert(&self, source: &str, findings: Vec<Finding>) {
        self.entries
            .lock()
            .unwrap()
            .insert(Self::source_key(source), findings);
    }
}

impl Analyzer for RecordedAnalyzer {
    fn analyze(&self, input: &AnalysisInput) -> Result<Vec<Finding>, AnalyzerError> {
        let key = Self::source_key(&input.source);
        match self.mode {
            CassetteMode::Replay => {
                let entries = self.entries.lock().unwrap();
                let mut findings = entries
                    .get(&key)
                    .cloned()
                    .ok_or_else(|| AnalyzerError::NotRecorded(input.name.clone()))?;
                for f in &mut findings {
                    f.file = input.name.clone();
                }
                Ok(findings)
            }
            CassetteMode::Record => {
                let inner = self.inner.as_ref().expect("record mode has a backend");
                let findings = inner.analyze(input)?;
                self.entries.lock().unwrap().insert(key, findings.clone());
                Ok(findings)
            }
        }
    }
}

/// Category x origin count table with a totals row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingTable {
    pub origins: Vec<String>,
    /// One row per taxonomy category plus `Other`, in taxonomy order.
    pub rows: Vec<FindingRow>,
    pub totals: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingRow {
    pub category: FindingCategory,
    pub counts: Vec<u64>,
}

impl FindingTable {
    pub fn count(&self, category: FindingCategory, origin: &str) -> u64 {
        let Some(col) = self.origins.iter().position(|o| o == origin) else {
            return 0;
        };
        self.rows
            .iter()
            .find(|r| r.category == category)
            .map(|r| r.counts[col])
            .unwrap_or(0)
    }

    pub fn total(&self, origin: &str) -> u64 {
        self.origins
            .iter()
            .position(|o| o == origin)
            .map(|c| self.totals[c])
            .unwrap_or(0)
    }

    /// Totals equal column sums.
    pub fn is_consistent(&self) -> bool {
        (0..self.origins.len())
            .all(|c| self.rows.iter().map(|r| r.counts[c]).sum::<u64>() == self.totals[c])
    }
}

/// Aggregates findings per origin column. Origins appear in the given order.
pub fn aggregate<'a>(
    groups: impl IntoIterator<Item = (&'a str, &'a [Finding])>,
) -> FindingTable {
    let groups: Vec<(&str, &[Finding])> = groups.into_iter().collect();
    let origins: Vec<String> = groups.iter().map(|(o, _)| o.to_string()).collect();
    let rows: Vec<FindingRow> = FindingCategory::all()
        .map(|category| FindingRow {
            category,
            counts: groups
                .iter()
                .map(|(_, fs)| fs.iter().filter(|f| f.category == category).count() as u64)
                .collect(),
        })
        .collect();
    let totals = (0..origins.len())
        .map(|c| rows.iter().map(|r| r.counts[c]).sum())
        .collect();
    FindingTable {
        origins,
        rows,
        totals,
    }
}

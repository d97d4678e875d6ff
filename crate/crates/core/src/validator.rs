//! Functional validation: local judge runs, differential testing, hash
//! vectors, cipher round trips, and external verdict import.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Difficulty;
use crate::exec::{self, Limits, MemoryEnforcement, RunOutput};

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("binary {0} does not exist")]
    BinaryMissing(PathBuf),
    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("vector set {0} is empty")]
    EmptyVectors(PathBuf),
    #[error("duplicate test case id `{0}`")]
    DuplicateCase(String),
    #[error("line {line}: unknown verdict `{verdict}`")]
    UnknownVerdict { line: usize, verdict: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuntimeSubtype {
    SignedIntegerOverflow,
    BufferOverflow,
    HeapBufferOverflow,
    StackBufferOverflow,
    ArrayIndexOutOfBounds,
    LoadAddressInsufficientSpace,
    AllocationSizeExceedsMaximum,
    Other,
}

impl RuntimeSubtype {
    pub fn as_str(self) -> &'static str {
        use RuntimeSubtype::*;
        match self {
            SignedIntegerOverflow => "signed-integer-overflow",
            BufferOverflow => "buffer-overflow",
            HeapBufferOverflow => "heap-buffer-overflow",
            StackBufferOverflow => "stack-buffer-overflow",
            ArrayIndexOutOfBounds => "array-index-out-of-bounds",
            LoadAddressInsufficientSpace => "load-address-insufficient-space",
            AllocationSizeExceedsMaximum => "allocation-size-exceeds-maximum",
            Other => "other",
        }
    }

    /// Classifies sanitizer output or a judge's error detail. Specific
    /// overflow kinds are checked before the generic buffer overflow.
    pub fn classify(text: &str) -> RuntimeSubtype {
        use RuntimeSubtype::*;
        let t = text.to_ascii_lowercase();
        let has = |needles: &[&str]| needles.iter().any(|n| t.contains(n));
        if has(&["heap-buffer-overflow", "heap buffer overflow"]) {
            HeapBufferOverflow
        } else if has(&["stack-buffer-overflow", "stack buffer overflow"]) {
            StackBufferOverflow
        } else if has(&["signed integer overflow", "signed-integer-overflow"]) {
            SignedIntegerOverflow
        } else if has(&[
            "out of bounds for type",
            "array index out of bounds",
            "array-index-out-of-bounds",
        ]) {
            ArrayIndexOutOfBounds
        } else if has(&["insufficient space"]) {
            LoadAddressInsufficientSpace
        } else if has(&[
            "requested allocation size",
            "allocation-size-too-big",
            "exceeds maximum supported size",
        ]) {
            AllocationSizeExceedsMaximum
        } else if has(&["buffer-overflow", "buffer overflow"]) {
            BufferOverflow
        } else {
            Other
        }
    }
}

impl fmt::Display for RuntimeSubtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictKind {
    Accepted,
    FailedTest { case_ids: Vec<String> },
    RuntimeError { subtype: RuntimeSubtype },
    TimeLimitExceeded,
    CompileError,
}

impl VerdictKind {
    pub fn label(&self) -> &'static str {
        match self {
            VerdictKind::Accepted => "Accepted",
            VerdictKind::FailedTest { .. } => "Failed Test Case",
            VerdictKind::RuntimeError { .. } => "Runtime Error",
            VerdictKind::TimeLimitExceeded => "Time Limit Exceeded",
            VerdictKind::CompileError => "Compile Error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub kind: VerdictKind,
    pub detail: String,
}

impl TestVerdict {
    pub fn new(kind: VerdictKind, detail: impl Into<String>) -> Self {
        TestVerdict {
            kind,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    Regular,
    Edge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub kind: CaseKind,
    pub input: String,
    pub expected: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteFile {
    #[serde(default, rename = "case")]
    cases: Vec<TestCase>,
}

/// Loads a `[[case]]` TOML suite, rejecting duplicate ids.
pub fn load_suite(path: &Path) -> Result<Vec<TestCase>, ValidationError> {
    let text = std::fs::read_to_string(path)?;
    let file: SuiteFile = toml::from_str(&text).map_err(|e| ValidationError::Malformed {
        path: path.to_path_buf(),
        line: e
            .span()
            .map(|s| text[..s.start].lines().count().max(1))
            .unwrap_or(0),
        reason: e.message().to_string(),
    })?;
    let mut seen = HashSet::new();
    for c in &file.cases {
        if !seen.insert(c.id.clone()) {
            return Err(ValidationError::DuplicateCase(c.id.clone()));
        }
    }
    Ok(file.cases)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitClass {
    Ok,
    Crash,
    Timeout,
}

/// Sanitizer runtimes print one of these on a fault.
fn sanitizer_report(stderr: &str) -> bool {
    stderr.contains("ERROR: AddressSanitizer")
        || stderr.contains("runtime error:")
        || stderr.contains("ERROR: LeakSanitizer")
        || stderr.contains("SUMMARY: UndefinedBehaviorSanitizer")
}

/// Timeout if the wall limit hit; crash on any signal, sanitizer report or
/// nonzero exit; ok otherwise.
pub fn exit_class(out: &RunOutput) -> ExitClass {
    if out.timed_out {
        ExitClass::Timeout
    } else if out.success() && !sanitizer_report(&out.stderr_text()) {
        ExitClass::Ok
    } else {
        ExitClass::Crash
    }
}

fn links_sanitizer(binary: &Path) -> bool {
    std::fs::read(binary)
        .map(|b| b.windows(11).any(|w| w == b"__asan_init"))
        .unwrap_or(false)
}

/// Runs one binary against inputs under fixed limits.
pub struct Runner {
    binary: PathBuf,
    limits: Limits,
    enforcement: MemoryEnforcement,
}

impl Runner {
    pub fn new(binary: &Path, limits: Limits) -> Result<Self, ValidationError> {
        if !binary.is_file() {
            return Err(ValidationError::BinaryMissing(binary.to_path_buf()));
        }
        let enforcement = if links_sanitizer(binary) {
            MemoryEnforcement::Sanitizer
        } else {
            MemoryEnforcement::AddressSpace
        };
        Ok(Runner {
            binary: binary.to_path_buf(),
            limits,
            enforcement,
        })
    }

    pub fn run(&self, args: &[&str], stdin: &[u8]) -> Result<RunOutput, ValidationError> {
        let mut cmd = Command::new(&self.binary);
        cmd.args(args);
        Ok(exec::run(cmd, stdin, &self.limits, self.enforcement)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_id: String,
    pub verdict: TestVerdict,
}

/// Runs each case sequentially: input on stdin, stdout compared byte for
/// byte with the expected output.
pub fn run_unit_suite(
    binary: &Path,
    suite: &[TestCase],
    limits: &Limits,
) -> Result<Vec<CaseResult>, ValidationError> {
    let runner = Runner::new(binary, *limits)?;
    let mut results = Vec::with_capacity(suite.len());
    for case in suite {
        let out = runner.run(&[], case.input.as_bytes())?;
        let stderr = out.stderr_text();
        let verdict = match exit_class(&out) {
            ExitClass::Timeout => TestVerdict::new(
                VerdictKind::TimeLimitExceeded,
                format!("exceeded {:?}", limits.wall),
            ),
            ExitClass::Crash => {
                let detail = if sanitizer_report(&stderr) {
                    first_report_line(&stderr)
                } else if let Some(sig) = out.signal() {
                    format!("killed by signal {sig}")
                } else {
                    format!("exit status {}", out.code().unwrap_or(-1))
                };
                let subtype = RuntimeSubtype::classify(&stderr);
                TestVerdict::new(VerdictKind::RuntimeError { subtype }, detail)
            }
            ExitClass::Ok if out.stdout == case.expected.as_bytes() => {
                TestVerdict::new(VerdictKind::Accepted, "")
            }
            ExitClass::Ok => TestVerdict::new(
                VerdictKind::FailedTest {
                    case_ids: vec![case.id.clone()],
                },
                format!(
                    "expected {:?}, got {:?}",
                    case.expected,
                    String::from_utf8_lossy(&out.stdout)
                ),
            ),
        };
        results.push(CaseResult {
            case_id: case.id.clone(),
            verdict,
        });
    }
    Ok(results)
}

fn first_report_line(stderr: &str) -> String {
    stderr
        .lines()
        .find(|l| l.contains("ERROR: ") || l.contains("runtime error:"))
        .unwrap_or("")
        .trim()
        .to_string()
}

/// One verdict for a whole suite: the first runtime error, else the first
/// timeout, else all failed case ids, else accepted.
pub fn suite_verdict(results: &[CaseResult]) -> TestVerdict {
    if let Some(r) = results
        .iter()
        .find(|r| matches!(r.verdict.kind, VerdictKind::RuntimeError { .. }))
    {
        return r.verdict.clone();
    }
    if let Some(r) = results
        .iter()
        .find(|r| r.verdict.kind == VerdictKind::TimeLimitExceeded)
    {
        return r.verdict.clone();
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|r| matches!(r.verdict.kind, VerdictKind::FailedTest { .. }))
        .map(|r| r.case_id.clone())
        .collect();
    if failed.is_empty() {
        TestVerdict::new(VerdictKind::Accepted, "")
    } else {
        let detail = format!("{} of {} cases failed", failed.len(), results.len());
        TestVerdict::new(VerdictKind::FailedTest { case_ids: failed }, detail)
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    #[serde(with = "hex_bytes")]
    pub stdout: Vec<u8>,
    pub exit: ExitClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    #[serde(with = "hex_bytes")]
    pub input: Vec<u8>,
    pub a: Outcome,
    pub b: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffReport {
    pub inputs_tried: usize,
    pub discrepancies: Vec<Discrepancy>,
}

fn outcome(runner: &Runner, input: &[u8]) -> Result<Outcome, ValidationError> {
    let out = runner.run(&[], input)?;
    Ok(Outcome {
        exit: exit_class(&out),
        stdout: out.stdout,
    })
}

/// Runs both binaries on every input and records differing outcomes.
pub fn run_differential(
    binary_a: &Path,
    binary_b: &Path,
    inputs: &[Vec<u8>],
    limits: &Limits,
) -> Result<DiffReport, ValidationError> {
    let a = Runner::new(binary_a, *limits)?;
    let b = Runner::new(binary_b, *limits)?;
    let rows = inputs
        .par_iter()
        .map(|input| {
            let oa = outcome(&a, input)?;
            let ob = outcome(&b, input)?;
            Ok((oa != ob).then(|| Discrepancy {
                input: input.clone(),
                a: oa,
                b: ob,
            }))
        })
        .collect::<Result<Vec<_>, ValidationError>>()?;
    Ok(DiffReport {
        inputs_tried: inputs.len(),
        discrepancies: rows.into_iter().flatten().collect(),
    })
}

/// Seeded printable inputs: up to `max_lines` lines of short tokens.
pub fn random_inputs(n: usize, seed: u64, max_lines: usize) -> Vec<Vec<u8>> {
    const WORDS: &[&str] = &["push", "pop", "insert", "find", "boom", "x", "-1", "0"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let lines = rng.gen_range(0..=max_lines);
            let mut s = String::new();
            for _ in 0..lines {
                if rng.gen_bool(0.5) {
                    s.push_str(WORDS[rng.gen_range(0..WORDS.len())]);
                    s.push(' ');
                }
                s.push_str(&rng.gen_range(-1000i64..=1000).to_string());
                s.push('\n');
            }
            s.into_bytes()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HashAlgorithm {
    Md5,
    Sha1,
    Sha256,
}

impl HashAlgorithm {
    pub fn digest_len(self) -> usize {
        match self {
            HashAlgorithm::Md5 => 16,
            HashAlgorithm::Sha1 => 20,
            HashAlgorithm::Sha256 => 32,
        }
    }

    /// Guesses the algorithm from a file or task name.
    pub fn infer(name: &str) -> Option<Self> {
        let n = name.to_ascii_lowercase();
        if n.contains("sha256") {
            Some(HashAlgorithm::Sha256)
        } else if n.contains("sha1") {
            Some(HashAlgorithm::Sha1)
        } else if n.contains("md5") {
            Some(HashAlgorithm::Md5)
        } else {
            None
        }
    }
}

impl FromStr for HashAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "md5" => Ok(HashAlgorithm::Md5),
            "sha1" => Ok(HashAlgorithm::Sha1),
            "sha256" => Ok(HashAlgorithm::Sha256),
            _ => Err(format!("unknown hash algorithm `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorEntry {
    #[serde(with = "hex_bytes")]
    pub message: Vec<u8>,
    #[serde(with = "hex_bytes")]
    pub digest: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorSet {
    pub algorithm: HashAlgorithm,
    pub entries: Vec<VectorEntry>,
}

fn hex_columns(path: &Path, expected_cols: usize) -> Result<Vec<Vec<Vec<u8>>>, ValidationError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let malformed = |reason: String| ValidationError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != expected_cols {
            return Err(malformed(format!(
                "expected {expected_cols} tab-separated columns, found {}",
                cols.len()
            )));
        }
        let row = cols
            .iter()
            .map(|c| hex::decode(c.trim()).map_err(|e| malformed(format!("bad hex: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads `message_hex<TAB>digest_hex` lines; `#` starts a comment line.
pub fn load_vectors(path: &Path, algorithm: HashAlgorithm) -> Result<VectorSet, ValidationError> {
    let rows = hex_columns(path, 2)?;
    if rows.is_empty() {
        return Err(ValidationError::EmptyVectors(path.to_path_buf()));
    }
    let mut entries = Vec::new();
    for (i, mut row) in rows.into_iter().enumerate() {
        let digest = row.pop().unwrap();
        if digest.len() != algorithm.digest_len() {
            return Err(ValidationError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                reason: format!(
                    "digest is {} bytes, {:?} digests are {}",
                    digest.len(),
                    algorithm,
                    algorithm.digest_len()
                ),
            });
        }
        entries.push(VectorEntry {
            message: row.pop().unwrap(),
            digest,
        });
    }
    Ok(VectorSet { algorithm, entries })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryResult {
    pub index: usize,
    pub passed: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryReport {
    pub entries: Vec<EntryResult>,
}

impl EntryReport {
    pub fn passed(&self) -> usize {
        self.entries.iter().filter(|e| e.passed).count()
    }

    pub fn total(&self) -> usize {
        self.entries.len()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.total()
    }
}

/// Feeds each message on stdin and compares the printed lowercase hex
/// digest (trailing whitespace ignored) with the expected one.
pub fn validate_hash_vectors(
    binary: &Path,
    set: &VectorSet,
    limits: &Limits,
) -> Result<EntryReport, ValidationError> {
    if set.entries.is_empty() {
        return Err(ValidationError::EmptyVectors(binary.to_path_buf()));
    }
    let runner = Runner::new(binary, *limits)?;
    let mut entries = Vec::new();
    for (index, v) in set.entries.iter().enumerate() {
        let out = runner.run(&[], &v.message)?;
        let fail = |reason: String| EntryResult {
            index,
            passed: false,
            reason: Some(reason),
        };
        let result = match exit_class(&out) {
            ExitClass::Timeout => fail("timeout".into()),
            ExitClass::Crash => fail(format!("crashed: {}", first_line(&out.stderr_text()))),
            ExitClass::Ok => {
                let printed = String::from_utf8_lossy(&out.stdout).trim_end().to_string();
                let expected = hex::encode(&v.digest);
                if printed.len() != expected.len() {
                    fail(format!(
                        "digest length {} hex chars, expected {}",
                        printed.len(),
                        expected.len()
                    ))
                } else if printed != expected {
                    fail(format!("got {printed}, expected {expected}"))
                } else {
                    EntryResult {
                        index,
                        passed: true,
                        reason: None,
                    }
                }
            }
        };
        entries.push(result);
    }
    Ok(EntryReport { entries })
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("").to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTripEntry {
    #[serde(with = "hex_bytes")]
    pub key: Vec<u8>,
    #[serde(with = "hex_bytes")]
    pub plaintext: Vec<u8>,
}

/// Reads `key_hex<TAB>plaintext_hex` lines.
pub fn load_roundtrip(path: &Path) -> Result<Vec<RoundTripEntry>, ValidationError> {
    let rows = hex_columns(path, 2)?;
    Ok(rows
        .into_iter()
        .map(|mut r| {
            let plaintext = r.pop().unwrap();
            RoundTripEntry {
                key: r.pop().unwrap(),
                plaintext,
            }
        })
        .collect())
}

/// Checks `decrypt(encrypt(x)) == x` through the binary's
/// `encrypt <keyhex>` / `decrypt <keyhex>` commands (hex on stdin/stdout).
pub fn validate_roundtrip(
    binary: &Path,
    inputs: &[RoundTripEntry],
    limits: &Limits,
) -> Result<EntryReport, ValidationError> {
    let runner = Runner::new(binary, *limits)?;
    let mut entries = Vec::new();
    for (index, e) in inputs.iter().enumerate() {
        let key = hex::encode(&e.key);
        let fail = |reason: String| EntryResult {
            index,
            passed: false,
            reason: Some(reason),
        };
        let step = |cmd: &str, data: &[u8]| -> Result<Result<Vec<u8>, String>, ValidationError> {
            let out = runner.run(&[cmd, &key], hex::encode(data).as_bytes())?;
            if exit_class(&out) != ExitClass::Ok {
                return Ok(Err(format!(
                    "{cmd} failed ({:?}): {}",
                    exit_class(&out),
                    first_line(&out.stderr_text())
                )));
            }
            let text = String::from_utf8_lossy(&out.stdout).trim().to_string();
            Ok(hex::decode(&text).map_err(|err| format!("{cmd} printed non-hex output: {err}")))
        };
        let result = match step("encrypt", &e.plaintext)? {
            Err(reason) => fail(reason),
            Ok(cipher) => match step("decrypt", &cipher)? {
                Err(reason) => fail(reason),
                Ok(plain) if plain == e.plaintext => EntryResult {
                    index,
                    passed: true,
                    reason: None,
                },
                Ok(plain) => fail(format!(
                    "decrypted to {}, expected {}",
                    hex::encode(plain),
                    hex::encode(&e.plaintext)
                )),
            },
        };
        entries.push(result);
    }
    Ok(EntryReport { entries })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportedVerdict {
    pub task_id: String,
    pub difficulty: Option<Difficulty>,
    pub verdict: TestVerdict,
}

fn parse_verdict_kind(verdict: &str, detail: &str) -> Option<VerdictKind> {
    let v = verdict.trim().to_ascii_lowercase();
    Some(match v.as_str() {
        "accepted" => VerdictKind::Accepted,
        "time limit exceeded" | "tle" => VerdictKind::TimeLimitExceeded,
        "runtime error" => VerdictKind::RuntimeError {
            subtype: RuntimeSubtype::classify(detail),
        },
        "failed test case" | "wrong answer" => VerdictKind::FailedTest {
            case_ids: Vec::new(),
        },
        "compile error" | "compilation error" => VerdictKind::CompileError,
        _ => return None,
    })
}

/// Parses `task_id,verdict,difficulty[,detail]` records. A third field that
/// is not a difficulty level is taken as the detail.
pub fn parse_external_verdicts(text: &str) -> Result<Vec<ImportedVerdict>, ValidationError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ValidationError::Malformed {
            path: PathBuf::from("<verdicts>"),
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let fields: Vec<&str> = record.iter().collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        if fields.first() == Some(&"task_id") {
            continue;
        }
        if fields.len() < 2 {
            return Err(ValidationError::Malformed {
                path: PathBuf::from("<verdicts>"),
                line,
                reason: "expected task_id,verdict[,difficulty][,detail]".into(),
            });
        }
        let (difficulty, detail) = match fields.get(2) {
            Some(f) => match Difficulty::parse(f) {
                Some(d) => (Some(d), fields[3..].join(",")),
                None => (None, fields[2..].join(",")),
            },
            None => (None, String::new()),
        };
        let kind = parse_verdict_kind(fields[1], &detail).ok_or_else(|| {
            ValidationError::UnknownVerdict {
                line,
                verdict: fields[1].to_string(),
            }
        })?;
        out.push(ImportedVerdict {
            task_id: fields[0].to_string(),
            difficulty,
            verdict: TestVerdict { kind, detail },
        });
    }
    Ok(out)
}

pub fn import_external_verdicts(path: &Path) -> Result<Vec<ImportedVerdict>, ValidationError> {
    let text = std::fs::read_to_string(path)?;
    parse_external_verdicts(&text).map_err(|e| match e {
        ValidationError::Malformed { line, reason, .. } => ValidationError::Malformed {
            path: path.to_path_buf(),
            line,
            reason,
        },
        other => other,
    })
}

//! Compiles code artifacts together with a task's harness sources.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CodeArtifact;
use crate::exec::{self, Limits, MemoryEnforcement};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("compiler `{0}` not found")]
    CompilerMissing(String),
    #[error("compilation exceeded {0:?}")]
    Timeout(Duration),
    #[error("invalid build spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sanitizer {
    Address,
    UndefinedBehavior,
}

impl Sanitizer {
    fn flag(self) -> &'static str {
        match self {
            Sanitizer::Address => "address",
            Sanitizer::UndefinedBehavior => "undefined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSpec {
    pub compiler: String,
    pub flags: Vec<String>,
    pub link_flags: Vec<String>,
    pub sanitizers: BTreeSet<Sanitizer>,
    pub timeout: Duration,
    /// Object linked into every binary, e.g. a fuzzer runtime.
    pub runtime_object: Option<PathBuf>,
}

impl Default for BuildSpec {
    /// C11, warnings on, no optimization, ASan + UBSan.
    fn default() -> Self {
        BuildSpec {
            compiler: "clang".into(),
            flags: ["-std=c11", "-Wall", "-O0", "-g"].map(String::from).to_vec(),
            link_flags: vec!["-lm".into()],
            sanitizers: [Sanitizer::Address, Sanitizer::UndefinedBehavior].into(),
            timeout: Duration::from_secs(60),
            runtime_object: None,
        }
    }
}

impl BuildSpec {
    pub fn unsanitized() -> Self {
        BuildSpec {
            sanitizers: BTreeSet::new(),
            ..Self::default()
        }
    }

    /// Coverage-instrumented build for the AFL-style fuzzer. Uses
    /// trace-pc-guard instrumentation plus the fuzzer's runtime object, so
    /// it works with a plain clang when the fuzzer's own driver is absent.
    pub fn fuzz(runtime: PathBuf) -> Self {
        let mut spec = BuildSpec::unsanitized();
        spec.flags = ["-std=gnu11", "-O1", "-g", "-fsanitize-coverage=trace-pc-guard"]
            .map(String::from)
            .to_vec();
        spec.sanitizers = [Sanitizer::Address].into();
        spec.runtime_object = Some(runtime);
        spec
    }

    fn sanitizer_flags(&self) -> Vec<String> {
        if self.sanitizers.is_empty() {
            return Vec::new();
        }
        let list: Vec<&str> = self.sanitizers.iter().map(|s| s.flag()).collect();
        vec![
            format!("-fsanitize={}", list.join(",")),
            "-fno-sanitize-recover=all".into(),
            "-fno-omit-frame-pointer".into(),
        ]
    }

    pub fn validate(&self) -> Result<(), BuildError> {
        if self.timeout.is_zero() {
            return Err(BuildError::InvalidSpec("timeout must be positive".into()));
        }
        if self.compiler.trim().is_empty() {
            return Err(BuildError::InvalidSpec("compiler is empty".into()));
        }
        Ok(())
    }
}

/// Sources compiled alongside an artifact.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Harness {
    /// `.c` files compiled and linked with the artifact.
    pub sources: Vec<PathBuf>,
    /// Headers force-included into every translation unit, so an artifact
    /// whose definitions disagree with them fails to compile.
    pub headers: Vec<PathBuf>,
    pub include_dirs: Vec<PathBuf>,
}

impl Harness {
    /// Splits a list of harness files into sources and headers.
    pub fn from_files(files: &[PathBuf]) -> Self {
        let mut h = Harness::default();
        for f in files {
            match f.extension().and_then(|e| e.to_str()) {
                Some("h") => h.headers.push(f.clone()),
                _ => h.sources.push(f.clone()),
            }
            if let Some(dir) = f.parent() {
                if !h.include_dirs.iter().any(|d| d == dir) {
                    h.include_dirs.push(dir.to_path_buf());
                }
            }
        }
        h
    }

    fn defines_main(&self) -> std::io::Result<bool> {
        static MAIN: OnceLock<Regex> = OnceLock::new();
        let re = MAIN.get_or_init(|| Regex::new(r"(?m)^\s*int\s+main\s*\(").unwrap());
        for s in &self.sources {
            if re.is_match(&std::fs::read_to_string(s)?) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompileErrorClass {
    SignatureMismatch,
    OtherCompileError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BuildStatus {
    Ok {
        binary: PathBuf,
    },
    CompileError {
        classification: CompileErrorClass,
        diagnostics: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildResult {
    pub status: BuildStatus,
    pub duration: Duration,
}

impl BuildResult {
    pub fn binary(&self) -> Option<&Path> {
        match &self.status {
            BuildStatus::Ok { binary } => Some(binary),
            BuildStatus::CompileError { .. } => None,
        }
    }
}

const DEFAULT_SIGNATURE_PATTERNS: &str = include_str!("../data/signature_patterns.txt");

/// Diagnostic substrings that indicate a declaration/definition mismatch.
#[derive(Debug, Clone)]
pub struct SignaturePatterns(Vec<String>);

impl SignaturePatterns {
    pub fn parse(text: &str) -> Self {
        SignaturePatterns(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_ascii_lowercase)
                .collect(),
        )
    }

    pub fn classify(&self, diagnostics: &str) -> CompileErrorClass {
        let errors: Vec<String> = diagnostics
            .lines()
            .filter(|l| l.contains("error"))
            .map(str::to_ascii_lowercase)
            .collect();
        if errors.iter().any(|l| self.0.iter().any(|p| l.contains(p))) {
            CompileErrorClass::SignatureMismatch
        } else {
            CompileErrorClass::OtherCompileError
        }
    }
}

impl Default for SignaturePatterns {
    fn default() -> Self {
        Self::parse(DEFAULT_SIGNATURE_PATTERNS)
    }
}

/// Compiles `artifact` with `harness` into `work_dir/<artifact>`.
///
/// When the harness provides `main`, the artifact's own `main` is renamed so
/// both can link.
pub fn compile(
    artifact: &CodeArtifact,
    harness: &Harness,
    spec: &BuildSpec,
    work_dir: &Path,
) -> Result<BuildResult, BuildError> {
    compile_with(artifact, harness, spec, work_dir, &SignaturePatterns::default())
}

pub fn compile_with(
    artifact: &CodeArtifact,
    harness: &Harness,
    spec: &BuildSpec,
    work_dir: &Path,
    patterns: &SignaturePatterns,
) -> Result<BuildResult, BuildError> {
    spec.validate()?;
    let dir = work_dir.join(sanitize(&artifact.id()));
    std::fs::create_dir_all(&dir)?;
    let src = dir.join("artifact.c");
    std::fs::write(&src, &artifact.source_text)?;
    let rename_main = harness.defines_main()?;

    let mut diagnostics = String::new();
    let mut objects = Vec::new();
    let mut duration = Duration::ZERO;
    let units = std::iter::once((src.clone(), true))
        .chain(harness.sources.iter().map(|s| (s.clone(), false)));
    for (i, (unit, is_artifact)) in units.enumerate() {
        let obj = dir.join(format!("unit{i}.o"));
        let mut cmd = Command::new(&spec.compiler);
        cmd.args(&spec.flags).args(spec.sanitizer_flags());
        for inc in &harness.include_dirs {
            cmd.arg("-I").arg(inc);
        }
        for h in &harness.headers {
            cmd.arg("-include").arg(h);
        }
        if is_artifact && rename_main {
            cmd.arg("-Dmain=codegauge_artifact_main");
        }
        cmd.arg("-c").arg(&unit).arg("-o").arg(&obj);
        let out = run_compiler(cmd, spec)?;
        duration += out.duration;
        diagnostics.push_str(&out.stderr_text());
        if !out.success() {
            return Ok(BuildResult {
                status: BuildStatus::CompileError {
                    classification: patterns.classify(&diagnostics),
                    diagnostics,
                },
                duration,
            });
        }
        objects.push(obj);
    }

    let binary = dir.join("a.out");
    let mut cmd = Command::new(&spec.compiler);
    cmd.args(spec.sanitizer_flags())
        .args(spec.flags.iter().filter(|f| f.starts_with("-fsanitize")))
        .args(&objects);
    if let Some(rt) = &spec.runtime_object {
        cmd.arg(rt);
    }
    cmd.args(&spec.link_flags).arg("-o").arg(&binary);
    let out = run_compiler(cmd, spec)?;
    duration += out.duration;
    diagnostics.push_str(&out.stderr_text());
    if !out.success() {
        return Ok(BuildResult {
            status: BuildStatus::CompileError {
                classification: patterns.classify(&diagnostics),
                diagnostics,
            },
            duration,
        });
    }
    Ok(BuildResult {
        status: BuildStatus::Ok { binary },
        duration,
    })
}

fn run_compiler(cmd: Command, spec: &BuildSpec) -> Result<exec::RunOutput, BuildError> {
    let limits = Limits {
        wall: spec.timeout,
        memory: None,
    };
    let out = exec::run(cmd, b"", &limits, MemoryEnforcement::AddressSpace).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            BuildError::CompilerMissing(spec.compiler.clone())
        } else {
            BuildError::Io(e)
        }
    })?;
    if out.timed_out {
        return Err(BuildError::Timeout(spec.timeout));
    }
    Ok(out)
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

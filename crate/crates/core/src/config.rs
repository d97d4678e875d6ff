//! Harness configuration, read from a TOML file.
//!
//! Every field has a default, so an empty file is a valid configuration.
//! Secrets never live in the file: the API key is read from the environment
//! variable named by `gateway.api_key_env`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Limits;
use crate::gateway::{DecodingParams, GenerationMode, StyleConstraint};
use crate::probe::ProbeFamily;
use crate::sast::FindingCategory;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub gateway: GatewayConfig,
    pub build: BuildConfig,
    pub validate: ValidateConfig,
    pub fuzz: FuzzConfig,
    pub analysis: AnalysisConfig,
    pub metrics: MetricsConfig,
    pub probe: ProbeConfig,
    #[serde(rename = "loop")]
    pub feedback: LoopConfig,
    pub parrot: ParrotConfig,
    pub report: ReportConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            gateway: GatewayConfig::default(),
            build: BuildConfig::default(),
            validate: ValidateConfig::default(),
            fuzz: FuzzConfig::default(),
            analysis: AnalysisConfig::default(),
            metrics: MetricsConfig::default(),
            probe: ProbeConfig::default(),
            feedback: LoopConfig::default(),
            parrot: ParrotConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewayConfig {
    pub model: String,
    pub mode: GenerationMode,
    /// Relative paths resolve against the configuration file's directory.
    pub cassette: Option<PathBuf>,
    pub endpoint: String,
    pub api_key_env: String,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    pub max_in_flight: usize,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            model: "gpt-4o".into(),
            mode: GenerationMode::Replay,
            cassette: None,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            temperature: None,
            max_tokens: None,
            max_in_flight: 4,
        }
    }
}

impl GatewayConfig {
    pub fn params(&self) -> DecodingParams {
        DecodingParams {
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildConfig {
    pub compiler: String,
    pub timeout_secs: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            compiler: "clang".into(),
            timeout_secs: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub wall_ms: u64,
    pub memory_mb: Option<u64>,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            wall_ms: 2000,
            memory_mb: Some(256),
        }
    }
}

impl ValidateConfig {
    pub fn limits(&self) -> Limits {
        Limits {
            wall: Duration::from_millis(self.wall_ms),
            memory: self.memory_mb.map(|m| m << 20),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzConfig {
    pub enabled: bool,
    pub seconds: u64,
    pub exec_timeout_ms: u64,
    /// Defaults to discovery (`$AFL_FUZZ`, `PATH`, cargo-afl install).
    pub fuzzer: Option<PathBuf>,
    pub runtime: Option<PathBuf>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            enabled: false,
            seconds: 60,
            exec_timeout_ms: 1000,
            fuzzer: None,
            runtime: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Recorded findings keyed by source hash. In replay mode findings come
    /// from here; in record mode the live analyzer's output is saved here.
    pub recording: Option<PathBuf>,
    pub clang: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Fraction trimmed from each end for the trimmed mean.
    pub trim: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { trim: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub enabled: bool,
    pub families: Vec<ProbeFamily>,
    pub trials: u32,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            enabled: true,
            families: ProbeFamily::ALL.to_vec(),
            trials: 5,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopConfig {
    pub enabled: bool,
    pub categories: Vec<FindingCategory>,
    pub seed: u64,
    pub style_constraints: Vec<StyleConstraint>,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            enabled: true,
            categories: FindingCategory::LOOP_CATEGORIES.to_vec(),
            seed: 2024,
            style_constraints: StyleConstraint::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParrotConfig {
    pub threshold: f64,
}

impl Default for ParrotConfig {
    fn default() -> Self {
        ParrotConfig {
            threshold: crate::parrot::DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Md,
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Md => "md",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }

    /// Parses a comma-separated list such as `md,csv,json`.
    pub fn parse_list(s: &str) -> Result<Vec<ReportFormat>, ConfigError> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let f = match part {
                "md" | "markdown" => ReportFormat::Md,
                "csv" => ReportFormat::Csv,
                "json" => ReportFormat::Json,
                _ => return Err(ConfigError::Invalid(format!("unknown report format `{part}`"))),
            };
            if !out.contains(&f) {
                out.push(f);
            }
        }
        if out.is_empty() {
            return Err(ConfigError::Invalid("no report format given".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub formats: Vec<ReportFormat>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            formats: vec![ReportFormat::Md, ReportFormat::Csv, ReportFormat::Json],
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path`, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.gateway.cassette);
        fix(&mut self.analysis.recording);
        fix(&mut self.fuzz.fuzzer);
        fix(&mut self.fuzz.runtime);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(0.0..0.5).contains(&self.metrics.trim) {
            return invalid("metrics.trim must be in [0, 0.5)");
        }
        if !(self.parrot.threshold > 0.0 && self.parrot.threshold < 1.0) {
            return invalid("parrot.threshold must be in (0, 1)");
        }
        if self.fuzz.enabled && self.fuzz.seconds == 0 {
            return invalid("fuzz.seconds must be positive");
        }
        if self.validate.wall_ms == 0 {
            return invalid("validate.wall_ms must be positive");
        }
        if let Some(c) = self.feedback.categories.iter().find(|c| c.loop_code().is_none()) {
            return Err(ConfigError::Invalid(format!("{c:?} is not a feedback-loop category")));
        }
        if self.report.formats.is_empty() {
            return invalid("report.formats is empty");
        }
        Ok(())
    }
}

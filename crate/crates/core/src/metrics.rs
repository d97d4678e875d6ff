//! Source metrics for C files: comment-aware line counts, decision-token
//! cyclomatic complexity, normalized complexity, and summary statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexer::{self, TokenKind};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("normalized complexity is undefined for a file with zero code lines")]
    ZeroCodeLines,
    #[error("summary statistics need at least one value")]
    EmptyInput,
    #[error("trim fraction {0} outside [0, 0.5)")]
    InvalidTrim(f64),
    #[error("geometric mean requires positive values, found {0}")]
    NonPositive(f64),
}

/// Partition of a file's physical lines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineStats {
    pub code: usize,
    pub comment: usize,
    pub blank: usize,
}

impl LineStats {
    pub fn physical(&self) -> usize {
        self.code + self.comment + self.blank
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub file: String,
    pub origin: String,
    pub lines: LineStats,
    pub complexity: u64,
    /// `complexity / lines.code`; `None` when the file has no code lines.
    pub normalized: Option<f64>,
}

impl MetricsRecord {
    pub fn measure(file: impl Into<String>, origin: impl Into<String>, source: &str) -> Self {
        let lines = count_lines(source);
        let complexity = cyclomatic_complexity(source);
        let normalized = normalized_complexity(complexity, lines.code).ok();
        MetricsRecord {
            file: file.into(),
            origin: origin.into(),
            lines,
            complexity,
            normalized,
        }
    }
}

/// Classifies every physical line as code, comment, or blank.
///
/// A line holding any token outside comments is code, even with a trailing
/// comment. Preprocessor lines are code.
pub fn count_lines(source: &str) -> LineStats {
    let total = lexer::physical_line_count(source);
    let mut has_code = vec![false; total];
    let mut has_comment = vec![false; total];
    for tok in lexer::lex(source) {
        let marks = if tok.kind.is_comment() {
            &mut has_comment
        } else {
            &mut has_code
        };
        for line in tok.start_line..=tok.end_line.min(total.saturating_sub(1)) {
            marks[line] = true;
        }
    }

    let mut stats = LineStats::default();
    for (idx, raw) in source.split('\n').take(total).enumerate() {
        if has_code[idx] {
            stats.code += 1;
        } else if has_comment[idx] {
            stats.comment += 1;
        } else if raw.trim().is_empty() {
            stats.blank += 1;
        } else {
            // Stray splice characters and the like.
            stats.code += 1;
        }
    }
    stats
}

const DECISION_KEYWORDS: [&str; 5] = ["if", "for", "while", "case", "goto"];
const DECISION_OPERATORS: [&str; 3] = ["?", "&&", "||"];

/// Counts decision tokens in code regions: `if`, `for`, `while`, `case`,
/// `goto`, `?`, `&&`, `||`. Comments, literals, and preprocessor directive
/// lines contribute nothing. No per-function base constant is added.
pub fn cyclomatic_complexity(source: &str) -> u64 {
    lexer::lex(source)
        .iter()
        .filter(|t| !t.in_directive)
        .filter(|t| match t.kind {
            TokenKind::Ident => DECISION_KEYWORDS.contains(&t.text),
            TokenKind::Punct => DECISION_OPERATORS.contains(&t.text),
            _ => false,
        })
        .count() as u64
}

pub fn normalized_complexity(complexity: u64, code_lines: usize) -> Result<f64, MetricsError> {
    if code_lines == 0 {
        return Err(MetricsError::ZeroCodeLines);
    }
    Ok(complexity as f64 / code_lines as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// `None` unless every sample is strictly positive.
    pub geometric_mean: Option<f64>,
    pub trimmed_mean: f64,
    pub trim: f64,
}

/// Mean, median, geometric mean and trimmed mean of `values`.
///
/// The trimmed mean drops `floor(trim * n)` values from each end of the
/// sorted sample. The geometric mean is reported only for all-positive
/// samples; use [`geometric_mean`] to get an error instead.
pub fn summary_stats(values: &[f64], trim: f64) -> Result<StatSummary, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if !(0.0..0.5).contains(&trim) {
        return Err(MetricsError::InvalidTrim(trim));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();

    let mean = sorted.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let cut = trim_count(trim, n);
    let kept = &sorted[cut..n - cut];
    let trimmed_mean = kept.iter().sum::<f64>() / kept.len() as f64;

    Ok(StatSummary {
        count: n,
        mean,
        median,
        geometric_mean: geometric_mean(values).ok(),
        trimmed_mean,
        trim,
    })
}

/// `floor(trim * n)`, tolerant of binary representation error in `trim`.
pub fn trim_count(trim: f64, n: usize) -> usize {
    let cut = (trim * n as f64 + 1e-9).floor() as usize;
    // trim < 0.5 guarantees at least one survivor.
    cut.min((n - 1) / 2)
}

pub fn geometric_mean(values: &[f64]) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if let Some(&bad) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(MetricsError::NonPositive(bad));
    }
    let log_mean = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
    Ok(log_mean.exp())
}

/// Header of the metrics CSV.
pub const CSV_HEADER: [&str; 7] = [
    "file",
    "origin",
    "code",
    "comment",
    "blank",
    "complexity",
    "normalized",
];

pub fn write_csv<W: std::io::Write>(records: &[MetricsRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.file.clone(),
            r.origin.clone(),
            r.lines.code.to_string(),
            r.lines.comment.to_string(),
            r.lines.blank.to_string(),
            r.complexity.to_string(),
            r.normalized
                .map(|v| format!("{v:.6}"))
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

//! Feedback loop: regenerate files with issue-targeted or style-constrained
//! prompts and re-measure.
//!
//! Findings are matched per file by category count, not by position: a
//! regenerated file is a rewrite, so positions do not carry over.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CodeArtifact, Origin, RegenerationTarget, Task};
use crate::gateway::{build_fix_prompt, build_style_prompt, Gateway, PromptSpec, StyleConstraint};
use crate::metrics::MetricsRecord;
use crate::sast::{AnalysisInput, Analyzer, Finding, FindingCategory};

#[derive(Debug, Error, PartialEq)]
pub enum LoopError {
    #[error("{0:?} is not a feedback-loop category")]
    UnsupportedCategory(FindingCategory),
}

/// One file taking part in a loop: its task, the artifact under study, and
/// that artifact's findings from the baseline analysis pass.
#[derive(Debug, Clone)]
pub struct LoopFile {
    pub task: Task,
    pub artifact: CodeArtifact,
    pub findings: Vec<Finding>,
    pub include_dirs: Vec<std::path::PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopPlan {
    pub category: FindingCategory,
    pub with_issue_files: Vec<String>,
    pub clean_files: Vec<String>,
    /// Seed used to draw the clean group.
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub plans: Vec<LoopPlan>,
    /// Categories left without a plan, with the reason.
    pub notices: Vec<String>,
}

/// Builds one plan per category. A file joins the with-issue group when it
/// has at least one finding of that category; the clean group is a seeded
/// draw, as large as the with-issue group when the pool allows, from files
/// with none of that category, preferring files with no findings at all.
pub fn plan_loops(
    findings: &BTreeMap<String, Vec<Finding>>,
    categories: &[FindingCategory],
    seed: u64,
) -> Result<PlanOutcome, LoopError> {
    let mut out = PlanOutcome::default();
    for &category in categories {
        if category.loop_code().is_none() {
            return Err(LoopError::UnsupportedCategory(category));
        }
        let (with, mut pool): (Vec<String>, Vec<String>) = findings
            .keys()
            .cloned()
            .partition(|file| findings[file].iter().any(|f| f.category == category));
        if with.is_empty() {
            let notice = format!("no files with {} findings; loop skipped", category.issue_phrase());
            log::info!("{notice}");
            out.notices.push(notice);
            continue;
        }
        // Files with no findings at all are drawn before files that only
        // lack this category.
        let cat_seed = seed ^ (category as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut rng = ChaCha8Rng::seed_from_u64(cat_seed);
        let (mut spotless, mut partial): (Vec<String>, Vec<String>) =
            pool.drain(..).partition(|file| findings[file].is_empty());
        spotless.shuffle(&mut rng);
        partial.shuffle(&mut rng);
        pool = spotless;
        pool.append(&mut partial);
        pool.truncate(with.len());
        pool.sort();
        out.plans.push(LoopPlan {
            category,
            with_issue_files: with,
            clean_files: pool,
            seed,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingDiff {
    pub removed: u64,
    pub persisted: u64,
    pub introduced: u64,
}

/// Count-based matching of one category: `persisted = min(before, after)`.
pub fn diff_counts(before: u64, after: u64) -> FindingDiff {
    let persisted = before.min(after);
    FindingDiff {
        removed: before - persisted,
        persisted,
        introduced: after - persisted,
    }
}

pub fn diff_findings(before: &[Finding], after: &[Finding], category: FindingCategory) -> FindingDiff {
    let count = |fs: &[Finding]| fs.iter().filter(|f| f.category == category).count() as u64;
    diff_counts(count(before), count(after))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopGroup {
    WithIssues,
    Clean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDelta {
    pub file: String,
    pub before: u64,
    /// `None` when regeneration or re-analysis failed.
    pub after: Option<u64>,
    pub diff: Option<FindingDiff>,
    pub error: Option<String>,
    pub regenerated: Option<CodeArtifact>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopResult {
    pub category: FindingCategory,
    pub group: LoopGroup,
    pub files: Vec<FileDelta>,
}

impl LoopResult {
    pub fn before_total(&self) -> u64 {
        self.files.iter().map(|f| f.before).sum()
    }

    /// Sum over files that completed.
    pub fn after_total(&self) -> u64 {
        self.files.iter().filter_map(|f| f.after).sum()
    }

    pub fn diff_total(&self) -> FindingDiff {
        self.files.iter().filter_map(|f| f.diff).fold(FindingDiff::default(), |a, d| FindingDiff {
            removed: a.removed + d.removed,
            persisted: a.persisted + d.persisted,
            introduced: a.introduced + d.introduced,
        })
    }

    /// `after = before - removed + introduced` for every completed file.
    pub fn identity_holds(&self) -> bool {
        self.files.iter().all(|f| match (f.after, f.diff) {
            (Some(after), Some(d)) => after + d.removed == f.before + d.introduced && d.removed <= f.before,
            _ => true,
        })
    }

    pub fn failures(&self) -> usize {
        self.files.iter().filter(|f| f.error.is_some()).count()
    }
}

fn regenerate(
    file: &LoopFile,
    prompt: &PromptSpec,
    target: RegenerationTarget,
    gateway: &Gateway,
    analyzer: &dyn Analyzer,
) -> Result<(CodeArtifact, Vec<Finding>), String> {
    let record = gateway.generate(prompt).map_err(|e| format!("generation: {e}"))?;
    let artifact = CodeArtifact {
        task_id: file.task.id.clone(),
        origin: Origin::LlmRegenerated {
            round: 1,
            target,
            model_id: record.model_id.clone(),
            prompt_hash: record.prompt_hash.clone(),
        },
        source_text: record.extracted_source,
    };
    let findings = analyzer
        .analyze(&AnalysisInput {
            name: artifact.id(),
            source: artifact.source_text.clone(),
            include_dirs: file.include_dirs.clone(),
        })
        .map_err(|e| format!("analysis: {e}"))?;
    Ok((artifact, findings))
}

/// Runs one iteration of `plan`: every file in both groups is regenerated
/// with the category's fix prompt and re-analyzed. Failures are recorded on
/// the file; the rest still run.
pub fn run_loop(
    plan: &LoopPlan,
    files: &BTreeMap<String, LoopFile>,
    gateway: &Gateway,
    analyzer: &dyn Analyzer,
) -> Result<Vec<LoopResult>, LoopError> {
    let category = plan.category;
    if category.loop_code().is_none() {
        return Err(LoopError::UnsupportedCategory(category));
    }
    let run_group = |ids: &[String], group| {
        let deltas = ids
            .par_iter()
            .map(|id| {
                let Some(file) = files.get(id) else {
                    return FileDelta {
                        file: id.clone(),
                        before: 0,
                        after: None,
                        diff: None,
                        error: Some("file not provided".into()),
                        regenerated: None,
                    };
                };
                let before = file.findings.iter().filter(|f| f.category == category).count() as u64;
                let outcome = build_fix_prompt(&file.task, category)
                    .map_err(|e| e.to_string())
                    .and_then(|prompt| {
                        regenerate(file, &prompt, RegenerationTarget::Category { category }, gateway, analyzer)
                    });
                match outcome {
                    Ok((artifact, after_findings)) => {
                        let diff = diff_findings(&file.findings, &after_findings, category);
                        FileDelta {
                            file: id.clone(),
                            before,
                            after: Some(diff.persisted + diff.introduced),
                            diff: Some(diff),
                            error: None,
                            regenerated: Some(artifact),
                        }
                    }
                    Err(e) => FileDelta {
                        file: id.clone(),
                        before,
                        after: None,
                        diff: None,
                        error: Some(e),
                        regenerated: None,
                    },
                }
            })
            .collect();
        LoopResult {
            category,
            group,
            files: deltas,
        }
    };
    Ok(vec![
        run_group(&plan.with_issue_files, LoopGroup::WithIssues),
        run_group(&plan.clean_files, LoopGroup::Clean),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleLoopResult {
    pub file: String,
    pub constraint: StyleConstraint,
    pub baseline: MetricsRecord,
    pub regenerated: Option<MetricsRecord>,
    /// Change in normalized complexity; `None` when either side has no code
    /// lines or the file failed.
    pub complexity_delta: Option<f64>,
    pub baseline_findings: u64,
    pub regenerated_findings: Option<u64>,
    pub finding_delta: Option<i64>,
    pub error: Option<String>,
}

/// Regenerates every file under a style constraint and reports the change
/// in normalized complexity and total finding count.
pub fn run_style_loop(
    files: &[&LoopFile],
    constraint: StyleConstraint,
    gateway: &Gateway,
    analyzer: &dyn Analyzer,
) -> Vec<StyleLoopResult> {
    files
        .par_iter()
        .map(|file| {
            let id = file.artifact.id();
            let baseline = MetricsRecord::measure(&id, file.artifact.origin.label(), &file.artifact.source_text);
            let baseline_findings = file.findings.len() as u64;
            let prompt = build_style_prompt(&file.task, constraint);
            match regenerate(file, &prompt, RegenerationTarget::Style { constraint }, gateway, analyzer) {
                Ok((artifact, findings)) => {
                    let after = MetricsRecord::measure(artifact.id(), artifact.origin.label(), &artifact.source_text);
                    let complexity_delta = match (baseline.normalized, after.normalized) {
                        (Some(b), Some(a)) => Some(a - b),
                        _ => None,
                    };
                    StyleLoopResult {
                        file: id,
                        constraint,
                        baseline,
                        regenerated: Some(after),
                        complexity_delta,
                        baseline_findings,
                        regenerated_findings: Some(findings.len() as u64),
                        finding_delta: Some(findings.len() as i64 - baseline_findings as i64),
                        error: None,
                    }
                }
                Err(e) => StyleLoopResult {
                    file: id,
                    constraint,
                    baseline,
                    regenerated: None,
                    complexity_delta: None,
                    baseline_findings,
                    regenerated_findings: None,
                    finding_delta: None,
                    error: Some(e),
                },
            }
        })
        .collect()
}

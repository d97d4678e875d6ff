//! Report tables derived from a session, rendered as Markdown, CSV or JSON.
//!
//! JSON is the canonical form and round-trips. CSV is long format
//! (`section,row,column,value`), one numeric cell per record.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ReportFormat;
use crate::corpus::TaskCategory;
use crate::feedback::{FindingDiff, LoopGroup};
use crate::gateway::GenerationMode;
use crate::metrics::{summary_stats, StatSummary};
use crate::parrot::SimilarityVerdict;
use crate::probe::ProbeFamily;
use crate::sast::{aggregate, Finding, FindingTable};
use crate::session::{FuzzSummary, Session};
use crate::validator::{TestVerdict, VerdictKind};

/// Rows of labelled counts with one column per origin and a totals row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<u64>)>,
    pub totals: Vec<u64>,
}

impl CountTable {
    fn new(columns: Vec<String>, rows: Vec<(String, Vec<u64>)>) -> Self {
        let totals = (0..columns.len())
            .map(|c| rows.iter().map(|(_, v)| v[c]).sum())
            .collect();
        CountTable { columns, rows, totals }
    }

    pub fn is_consistent(&self) -> bool {
        (0..self.columns.len()).all(|c| self.rows.iter().map(|(_, v)| v[c]).sum::<u64>() == self.totals[c])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub family: ProbeFamily,
    pub description: String,
    pub ground_truth: u64,
    pub trials: u64,
    pub correct: u64,
    pub wrong_integer: u64,
    pub non_integer: u64,
    pub missing: u64,
    pub success_rate: f64,
}

/// One non-accepted outcome, in the style of a failure listing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub task_id: String,
    pub origin: String,
    pub verdict: String,
    pub difficulty: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzRow {
    pub task_id: String,
    pub llm: Option<FuzzSummary>,
    pub human: Option<FuzzSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub group: String,
    pub origin: String,
    pub measure: String,
    pub stats: Option<StatSummary>,
}

/// Per-category loop counts; `code` is `M`, `A` or `N`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopCell {
    pub files: u64,
    pub before: u64,
    pub after: u64,
    pub diff: FindingDiff,
    pub failures: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopTable {
    pub columns: Vec<(String, LoopCell)>,
    pub total: LoopCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleRow {
    pub constraint: String,
    pub files: u64,
    pub failures: u64,
    pub mean_complexity_delta: Option<f64>,
    pub finding_delta: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub session_id: String,
    pub model_id: String,
    pub mode: GenerationMode,
    pub corpus_hash: String,
    pub probe: Vec<ProbeRow>,
    pub verdict_counts: CountTable,
    pub runtime_subtypes: CountTable,
    pub verdict_rows: Vec<VerdictRow>,
    /// Absent when fuzzing was disabled.
    pub fuzz: Option<Vec<FuzzRow>>,
    pub findings: FindingTable,
    pub metrics: Vec<MetricsRow>,
    pub parroting: Vec<SimilarityVerdict>,
    pub loop_with_issues: LoopTable,
    pub loop_clean: LoopTable,
    pub style: Vec<StyleRow>,
    pub stage_failures: u64,
}

const VERDICT_LABELS: [&str; 5] = [
    "Accepted",
    "Failed Test Case",
    "Runtime Error",
    "Time Limit Exceeded",
    "Compile Error",
];

fn verdict_columns(session: &Session) -> Vec<(String, Vec<(String, Option<String>, &TestVerdict)>)> {
    let mut human = Vec::new();
    let mut llm = Vec::new();
    for t in &session.tasks {
        let diff = t.difficulty.map(|d| d.to_string());
        if let Some(v) = t.human.as_ref().and_then(|a| a.verdict.as_ref()) {
            human.push((t.task_id.clone(), diff.clone(), v));
        }
        if let Some(v) = t.llm.as_ref().and_then(|a| a.verdict.as_ref()) {
            llm.push((t.task_id.clone(), diff, v));
        }
    }
    let mut cols = vec![("human".to_string(), human), ("llm".to_string(), llm)];
    if !session.imported_verdicts.is_empty() {
        cols.push((
            "judge".to_string(),
            session
                .imported_verdicts
                .iter()
                .map(|v| (v.task_id.clone(), v.difficulty.map(|d| d.to_string()), &v.verdict))
                .collect(),
        ));
    }
    cols
}

fn loop_table(session: &Session, group: LoopGroup) -> LoopTable {
    let mut columns = Vec::new();
    let mut total = LoopCell::default();
    for cat in &session.config.feedback.categories {
        let mut cell = LoopCell::default();
        for r in session.loops.iter().filter(|r| r.category == *cat && r.group == group) {
            cell.files += r.files.len() as u64;
            cell.before += r.before_total();
            cell.after += r.after_total();
            let d = r.diff_total();
            cell.diff.removed += d.removed;
            cell.diff.persisted += d.persisted;
            cell.diff.introduced += d.introduced;
            cell.failures += r.failures() as u64;
        }
        total.files += cell.files;
        total.before += cell.before;
        total.after += cell.after;
        total.diff.removed += cell.diff.removed;
        total.diff.persisted += cell.diff.persisted;
        total.diff.introduced += cell.diff.introduced;
        total.failures += cell.failures;
        columns.push((cat.loop_code().unwrap_or("?").to_string(), cell));
    }
    LoopTable { columns, total }
}

fn metrics_rows(session: &Session) -> Vec<MetricsRow> {
    let trim = session.config.metrics.trim;
    let mut rows = Vec::new();
    let groups: Vec<Option<TaskCategory>> = std::iter::once(None)
        .chain(
            [
                TaskCategory::Leetcode,
                TaskCategory::DataStructureAlgorithm,
                TaskCategory::Cryptographic,
            ]
            .map(Some),
        )
        .collect();
    for group in groups {
        let tasks: Vec<_> = session
            .tasks
            .iter()
            .filter(|t| group.map_or(true, |g| t.category == g))
            .collect();
        if group.is_some() && tasks.is_empty() {
            continue;
        }
        for origin in ["llm", "human"] {
            let recs: Vec<_> = tasks
                .iter()
                .filter_map(|t| if origin == "llm" { t.llm.as_ref() } else { t.human.as_ref() })
                .map(|a| &a.metrics)
                .collect();
            let measures: [(&str, Vec<f64>); 3] = [
                ("complexity", recs.iter().map(|r| r.complexity as f64).collect()),
                ("complexity_per_code_line", recs.iter().filter_map(|r| r.normalized).collect()),
                ("code_lines", recs.iter().map(|r| r.lines.code as f64).collect()),
            ];
            for (measure, values) in measures {
                rows.push(MetricsRow {
                    group: group.map_or("all", |g| g.label()).to_string(),
                    origin: origin.to_string(),
                    measure: measure.to_string(),
                    stats: summary_stats(&values, trim).ok(),
                });
            }
        }
    }
    rows
}

impl Report {
    pub fn from_session(session: &Session) -> Self {
        let probe = session
            .probes
            .iter()
            .map(|r| ProbeRow {
                family: r.summary.family,
                description: r.summary.family.description().to_string(),
                ground_truth: r.summary.ground_truth,
                trials: r.summary.trials,
                correct: r.summary.correct,
                wrong_integer: r.summary.wrong_integer,
                non_integer: r.summary.non_integer,
                missing: r.summary.missing,
                success_rate: r.summary.success_rate,
            })
            .collect();

        let cols = verdict_columns(session);
        let names: Vec<String> = cols.iter().map(|(n, _)| n.clone()).collect();
        let verdict_counts = CountTable::new(
            names.clone(),
            VERDICT_LABELS
                .iter()
                .map(|label| {
                    let counts = cols
                        .iter()
                        .map(|(_, vs)| vs.iter().filter(|(_, _, v)| v.kind.label() == *label).count() as u64)
                        .collect();
                    (label.to_string(), counts)
                })
                .collect(),
        );
        let mut subtypes: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        for (c, (_, vs)) in cols.iter().enumerate() {
            for (_, _, v) in vs {
                if let VerdictKind::RuntimeError { subtype } = &v.kind {
                    subtypes.entry(subtype.to_string()).or_insert_with(|| vec![0; cols.len()])[c] += 1;
                }
            }
        }
        let runtime_subtypes = CountTable::new(names, subtypes.into_iter().collect());
        let verdict_rows = cols
            .iter()
            .flat_map(|(origin, vs)| {
                vs.iter()
                    .filter(|(_, _, v)| v.kind != VerdictKind::Accepted)
                    .map(move |(task, diff, v)| VerdictRow {
                        task_id: task.clone(),
                        origin: origin.clone(),
                        verdict: v.kind.label().to_string(),
                        difficulty: diff.clone(),
                        detail: match &v.kind {
                            VerdictKind::RuntimeError { subtype } => subtype.to_string(),
                            _ => v.detail.clone(),
                        },
                    })
            })
            .collect();

        let fuzz = session.config.fuzz.enabled.then(|| {
            session
                .tasks
                .iter()
                .filter(|t| t.artifacts().any(|a| a.fuzz.is_some()))
                .map(|t| FuzzRow {
                    task_id: t.task_id.clone(),
                    llm: t.llm.as_ref().and_then(|a| a.fuzz.clone()),
                    human: t.human.as_ref().and_then(|a| a.fuzz.clone()),
                })
                .collect()
        });

        let empty: Vec<Finding> = Vec::new();
        let collect_findings = |llm: bool| -> Vec<Finding> {
            session
                .tasks
                .iter()
                .filter_map(|t| if llm { t.llm.as_ref() } else { t.human.as_ref() })
                .flat_map(|a| a.findings.as_deref().unwrap_or(&empty).iter().cloned())
                .collect()
        };
        let llm_findings = collect_findings(true);
        let human_findings = collect_findings(false);
        let findings = aggregate([("llm", llm_findings.as_slice()), ("human", human_findings.as_slice())]);

        let style = session
            .config
            .feedback
            .style_constraints
            .iter()
            .map(|c| {
                let rs: Vec<_> = session.style.iter().filter(|r| r.constraint == *c).collect();
                let deltas: Vec<f64> = rs.iter().filter_map(|r| r.complexity_delta).collect();
                StyleRow {
                    constraint: c.to_string(),
                    files: rs.len() as u64,
                    failures: rs.iter().filter(|r| r.error.is_some()).count() as u64,
                    mean_complexity_delta: (!deltas.is_empty())
                        .then(|| deltas.iter().sum::<f64>() / deltas.len() as f64),
                    finding_delta: rs.iter().filter_map(|r| r.finding_delta).sum(),
                }
            })
            .collect();

        Report {
            session_id: session.id.clone(),
            model_id: session.model_id.clone(),
            mode: session.mode,
            corpus_hash: session.corpus_hash.clone(),
            probe,
            verdict_counts,
            runtime_subtypes,
            verdict_rows,
            fuzz,
            findings,
            metrics: metrics_rows(session),
            parroting: session.parroting.clone(),
            loop_with_issues: loop_table(session, LoopGroup::WithIssues),
            loop_clean: loop_table(session, LoopGroup::Clean),
            style,
            stage_failures: session.failures.len() as u64,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Long-format records: `section,row,column,value`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut put = |section: &str, row: &str, column: &str, value: String| {
            w.write_record([section, row, column, &value]).expect("in-memory write");
        };
        put("section", "row", "column", "value".into());
        for p in &self.probe {
            let row = p.family.to_string();
            put("probe", &row, "ground_truth", p.ground_truth.to_string());
            put("probe", &row, "trials", p.trials.to_string());
            put("probe", &row, "correct", p.correct.to_string());
            put("probe", &row, "wrong_integer", p.wrong_integer.to_string());
            put("probe", &row, "non_integer", p.non_integer.to_string());
            put("probe", &row, "missing", p.missing.to_string());
            put("probe", &row, "success_rate", p.success_rate.to_string());
        }
        for (section, t) in [("verdicts", &self.verdict_counts), ("runtime_subtypes", &self.runtime_subtypes)] {
            for (label, counts) in &t.rows {
                for (c, n) in t.columns.iter().zip(counts) {
                    put(section, label, c, n.to_string());
                }
            }
            for (c, n) in t.columns.iter().zip(&t.totals) {
                put(section, "Total", c, n.to_string());
            }
        }
        if let Some(fuzz) = &self.fuzz {
            for r in fuzz {
                for (origin, cell) in [("llm", &r.llm), ("human", &r.human)] {
                    let (hangs, crashes) = fuzz_cells(cell);
                    put("fuzz", &r.task_id, &format!("{origin}_hangs"), hangs);
                    put("fuzz", &r.task_id, &format!("{origin}_crashes"), crashes);
                }
            }
        }
        for row in &self.findings.rows {
            for (o, n) in self.findings.origins.iter().zip(&row.counts) {
                put("findings", row.category.label(), o, n.to_string());
            }
        }
        for (o, n) in self.findings.origins.iter().zip(&self.findings.totals) {
            put("findings", "Total", o, n.to_string());
        }
        for m in &self.metrics {
            let row = format!("{}/{}/{}", m.group, m.origin, m.measure);
            if let Some(s) = &m.stats {
                put("metrics", &row, "count", s.count.to_string());
                put("metrics", &row, "mean", s.mean.to_string());
                put("metrics", &row, "median", s.median.to_string());
                put("metrics", &row, "geometric_mean", opt(s.geometric_mean));
                put("metrics", &row, "trimmed_mean", s.trimmed_mean.to_string());
            }
        }
        for p in &self.parroting {
            put("parroting", &p.llm_id, "similarity", p.similarity.to_string());
            put("parroting", &p.llm_id, "verdict", p.verdict.label().to_string());
        }
        for (section, t) in [("loop_with_issues", &self.loop_with_issues), ("loop_clean", &self.loop_clean)] {
            let cells = t.columns.iter().map(|(c, v)| (c.as_str(), v)).chain([("Total", &t.total)]);
            for (code, cell) in cells {
                put(section, "files", code, cell.files.to_string());
                put(section, "before", code, cell.before.to_string());
                put(section, "after", code, cell.after.to_string());
                put(section, "removed", code, cell.diff.removed.to_string());
                put(section, "persisted", code, cell.diff.persisted.to_string());
                put(section, "introduced", code, cell.diff.introduced.to_string());
                put(section, "failures", code, cell.failures.to_string());
            }
        }
        for s in &self.style {
            put("style", &s.constraint, "files", s.files.to_string());
            put("style", &s.constraint, "mean_complexity_delta", opt(s.mean_complexity_delta));
            put("style", &s.constraint, "finding_delta", s.finding_delta.to_string());
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# Evaluation report\n");
        let _ = writeln!(
            s,
            "Session `{}`, model `{}`, mode `{:?}`, corpus `{}`.\n",
            self.session_id,
            self.model_id,
            self.mode,
            &self.corpus_hash[..self.corpus_hash.len().min(16)]
        );

        if !self.probe.is_empty() {
            let _ = writeln!(s, "## Buffer-size probes\n");
            table(
                &mut s,
                &["Family", "Truth", "Trials", "Correct", "Wrong int", "Non-int", "Missing", "Success"],
                self.probe.iter().map(|p| {
                    vec![
                        p.description.clone(),
                        p.ground_truth.to_string(),
                        p.trials.to_string(),
                        p.correct.to_string(),
                        p.wrong_integer.to_string(),
                        p.non_integer.to_string(),
                        p.missing.to_string(),
                        format!("{:.0}%", p.success_rate * 100.0),
                    ]
                }),
            );
        }

        let _ = writeln!(s, "## Functional verdicts\n");
        count_table(&mut s, "Verdict", &self.verdict_counts);
        if !self.runtime_subtypes.rows.is_empty() {
            count_table(&mut s, "Runtime error", &self.runtime_subtypes);
        }
        if !self.verdict_rows.is_empty() {
            table(
                &mut s,
                &["Task", "Origin", "Error type", "Difficulty", "Details"],
                self.verdict_rows.iter().map(|r| {
                    vec![
                        r.task_id.clone(),
                        r.origin.clone(),
                        r.verdict.clone(),
                        r.difficulty.clone().unwrap_or_default(),
                        r.detail.replace('|', "\\|"),
                    ]
                }),
            );
        }

        if let Some(fuzz) = &self.fuzz {
            let _ = writeln!(s, "## Fuzzing\n");
            table(
                &mut s,
                &["Task", "Hangs (LLM)", "Hangs (Human)", "Crashes (LLM)", "Crashes (Human)"],
                fuzz.iter().map(|r| {
                    let (lh, lc) = fuzz_cells(&r.llm);
                    let (hh, hc) = fuzz_cells(&r.human);
                    vec![r.task_id.clone(), lh, hh, lc, hc]
                }),
            );
        }

        let _ = writeln!(s, "## Static analysis findings\n");
        let mut header = vec!["Category".to_string()];
        header.extend(self.findings.origins.iter().cloned());
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        table(
            &mut s,
            &header,
            self.findings
                .rows
                .iter()
                .map(|r| {
                    std::iter::once(r.category.label().to_string())
                        .chain(r.counts.iter().map(u64::to_string))
                        .collect()
                })
                .chain(std::iter::once(
                    std::iter::once("**Total**".to_string())
                        .chain(self.findings.totals.iter().map(u64::to_string))
                        .collect(),
                )),
        );

        let _ = writeln!(s, "## Complexity and size\n");
        table(
            &mut s,
            &["Group", "Origin", "Measure", "n", "Mn", "Md", "GM", "TM"],
            self.metrics.iter().map(|m| {
                let mut row = vec![m.group.clone(), m.origin.clone(), m.measure.clone()];
                match &m.stats {
                    Some(st) => row.extend([
                        st.count.to_string(),
                        format!("{:.2}", st.mean),
                        format!("{:.2}", st.median),
                        st.geometric_mean.map_or("-".into(), |g| format!("{g:.2}")),
                        format!("{:.2}", st.trimmed_mean),
                    ]),
                    None => row.extend(["0", "-", "-", "-", "-"].map(String::from)),
                }
                row
            }),
        );

        let _ = writeln!(s, "## Parroting\n");
        table(
            &mut s,
            &["LLM artifact", "Human artifact", "Similarity", "Verdict"],
            self.parroting.iter().map(|p| {
                vec![
                    p.llm_id.clone(),
                    p.human_id.clone(),
                    format!("{:.4}", p.similarity),
                    p.verdict.label().to_string(),
                ]
            }),
        );

        let _ = writeln!(s, "## Feedback loop\n");
        let codes: Vec<String> = self
            .loop_with_issues
            .columns
            .iter()
            .map(|(c, _)| c.clone())
            .chain(["Total".to_string()])
            .collect();
        let mut header = vec![""];
        header.extend(codes.iter().map(String::as_str));
        let cells = |t: &LoopTable| -> Vec<LoopCell> {
            t.columns.iter().map(|(_, c)| *c).chain([t.total]).collect()
        };
        let row = |label: &str, cs: &[LoopCell], f: fn(&LoopCell) -> u64| -> Vec<String> {
            std::iter::once(label.to_string()).chain(cs.iter().map(|c| f(c).to_string())).collect()
        };
        let w = cells(&self.loop_with_issues);
        let c = cells(&self.loop_clean);
        let _ = writeln!(s, "Files per category:\n");
        table(&mut s, &header, [row("# of files", &w, |c| c.files)].into_iter());
        for (title, cs) in [("Files with issues before the loop:", &w), ("Files without issues before the loop:", &c)] {
            let _ = writeln!(s, "{title}\n");
            table(
                &mut s,
                &header,
                [
                    row("Before", cs, |c| c.before),
                    row("After", cs, |c| c.after),
                    row("Removed", cs, |c| c.diff.removed),
                    row("Persisted", cs, |c| c.diff.persisted),
                    row("Introduced", cs, |c| c.diff.introduced),
                    row("Failed", cs, |c| c.failures),
                ]
                .into_iter(),
            );
        }

        if !self.style.is_empty() {
            let _ = writeln!(s, "## Style constraints\n");
            table(
                &mut s,
                &["Constraint", "Files", "Failed", "Mean complexity/code delta", "Finding delta"],
                self.style.iter().map(|r| {
                    vec![
                        r.constraint.clone(),
                        r.files.to_string(),
                        r.failures.to_string(),
                        r.mean_complexity_delta.map_or("-".into(), |d| format!("{d:+.4}")),
                        format!("{:+}", r.finding_delta),
                    ]
                }),
            );
        }
        if self.stage_failures > 0 {
            let _ = writeln!(s, "{} stage failures recorded; see the session file.\n", self.stage_failures);
        }
        s
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Md => self.to_markdown(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn fuzz_cells(cell: &Option<FuzzSummary>) -> (String, String) {
    match cell {
        Some(FuzzSummary::Counts {
            unique_hangs,
            unique_crashes,
            ..
        }) => (unique_hangs.to_string(), unique_crashes.to_string()),
        Some(FuzzSummary::NotApplicable { .. }) => ("N/A".into(), "N/A".into()),
        None => ("-".into(), "-".into()),
    }
}

fn table(s: &mut String, header: &[&str], rows: impl Iterator<Item = Vec<String>>) {
    let _ = writeln!(s, "| {} |", header.join(" | "));
    let _ = writeln!(s, "|{}", "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(s, "| {} |", r.join(" | "));
    }
    s.push('\n');
}

fn count_table(s: &mut String, label: &str, t: &CountTable) {
    let mut header = vec![label];
    header.extend(t.columns.iter().map(String::as_str));
    table(
        s,
        &header,
        t.rows
            .iter()
            .map(|(l, v)| std::iter::once(l.clone()).chain(v.iter().map(u64::to_string)).collect())
            .chain(std::iter::once(
                std::iter::once("**Total**".to_string())
                    .chain(t.totals.iter().map(u64::to_string))
                    .collect(),
            )),
    );
}

/// Writes `report.<ext>` for each format into `dir` and returns the paths.
pub fn emit_report(session: &Session, formats: &[ReportFormat], dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let report = Report::from_session(session);
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for f in formats {
        let path = dir.join(format!("report.{}", f.extension()));
        std::fs::write(&path, report.render(*f))?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    #[test]
    fn empty_session_has_zero_tables() {
        let s = Session::new(&Config::default(), "abc");
        let r = Report::from_session(&s);
        assert!(r.findings.is_consistent());
        assert!(r.findings.totals.iter().all(|t| *t == 0));
        assert_eq!(r.findings.rows.len(), 17);
        assert!(r.verdict_counts.is_consistent());
        assert!(r.fuzz.is_none());
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
        let md = r.to_markdown();
        assert!(md.contains("| **Total** | 0 | 0 |"));
        assert!(r.to_csv().starts_with("section,row,column,value\n"));
    }

    #[test]
    fn not_applicable_cells() {
        assert_eq!(
            fuzz_cells(&Some(FuzzSummary::NotApplicable { reason: "x".into() })),
            ("N/A".to_string(), "N/A".to_string())
        );
    }
}

//! Per-task stage orchestration.
//!
//! Each stage is a public function so the CLI can run it on its own. Tasks
//! run in parallel; results flow back through `collect` into one session.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::build::{compile, BuildSpec, BuildStatus, Harness};
use crate::config::Config;
use crate::corpus::{CodeArtifact, ContractKind, Corpus, Origin, Task};
use crate::feedback::{plan_loops, run_loop, run_style_loop, LoopFile};
use crate::fuzz::{
    dictionary_tokens, locate_fuzzer, locate_runtime, make_seed, run_fuzzer, scaffold_entry_point,
    write_dictionary, FuzzCell, FuzzConfig, InstructionGrammar,
};
use crate::gateway::{
    build_generation_prompt, Cassette, Gateway, GatewayError, GenerationMode, HttpClient, ModelClient,
};
use crate::metrics::MetricsRecord;
use crate::parrot::flag_parroting;
use crate::probe::run_probe;
use crate::sast::{AnalysisInput, Analyzer, AnalyzerError, ClangAnalyzer, Finding, RecordedAnalyzer};
use crate::session::{
    scrub, ArtifactResult, BuildOutcome, FuzzSummary, Session, Stage, StageFailure, TaskResult,
    VectorOutcome,
};
use crate::validator::{
    import_external_verdicts, load_suite, load_vectors, run_unit_suite, suite_verdict,
    validate_hash_vectors, HashAlgorithm, TestVerdict, VerdictKind,
};

#[derive(Debug, Error)]
pub enum SetupError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Analyzer(#[from] AnalyzerError),
}

enum AnalyzerBackend {
    Live(ClangAnalyzer),
    Recorded { inner: RecordedAnalyzer, save_to: Option<PathBuf> },
}

/// Gateway and analyzer chosen by the configured mode.
///
/// Replay needs a cassette and, when `analysis.recording` is set, replays
/// findings from it without running clang. Record saves both on `finish`.
pub struct Backends {
    pub gateway: Gateway,
    analyzer: AnalyzerBackend,
}

impl Backends {
    /// `client` overrides the HTTP client for live and record modes.
    pub fn open(config: &Config, client: Option<Box<dyn ModelClient>>) -> Result<Self, SetupError> {
        let g = &config.gateway;
        let cassette = match (&g.cassette, g.mode) {
            (Some(p), _) => Cassette::open(p)?,
            (None, GenerationMode::Live) => Cassette::in_memory(),
            (None, mode) => return Err(SetupError::Config(format!("{mode:?} mode needs a cassette"))),
        };
        let mut gateway = match g.mode {
            GenerationMode::Replay => Gateway::replay(&g.model, cassette),
            mode => {
                let client = match client {
                    Some(c) => c,
                    None => Box::new(HttpClient::new(&g.endpoint, &g.model, &g.api_key_env)?),
                };
                Gateway::with_client(&g.model, mode, cassette, client)
            }
        };
        gateway.params = g.params();
        gateway.set_max_in_flight(g.max_in_flight);

        let clang = || {
            let mut a = ClangAnalyzer::default();
            if let Some(c) = &config.analysis.clang {
                a.clang = c.clone();
            }
            a
        };
        let analyzer = match (&config.analysis.recording, g.mode) {
            (None, _) => AnalyzerBackend::Live(clang()),
            (Some(p), GenerationMode::Replay) => AnalyzerBackend::Recorded {
                inner: RecordedAnalyzer::load(p)?,
                save_to: None,
            },
            (Some(p), GenerationMode::Record) => AnalyzerBackend::Recorded {
                inner: RecordedAnalyzer::record(Box::new(clang())),
                save_to: Some(p.clone()),
            },
            (Some(_), GenerationMode::Live) => AnalyzerBackend::Live(clang()),
        };
        Ok(Backends { gateway, analyzer })
    }

    pub fn analyzer(&self) -> &dyn Analyzer {
        match &self.analyzer {
            AnalyzerBackend::Live(a) => a,
            AnalyzerBackend::Recorded { inner, .. } => inner,
        }
    }

    /// Persists recordings. A no-op outside record mode.
    pub fn finish(&self) -> Result<(), SetupError> {
        if self.gateway.mode == GenerationMode::Record {
            self.gateway.cassette().save()?;
        }
        if let AnalyzerBackend::Recorded {
            inner,
            save_to: Some(p),
        } = &self.analyzer
        {
            inner.save(p)?;
        }
        Ok(())
    }
}

/// Everything a stage needs. `work_dir` holds build products and fuzzer
/// output; nothing from it reaches the session except scrubbed messages.
pub struct Context<'a> {
    pub corpus: &'a Corpus,
    pub config: &'a Config,
    pub gateway: &'a Gateway,
    pub analyzer: &'a dyn Analyzer,
    pub work_dir: PathBuf,
}

type Failures = Vec<StageFailure>;

impl Context<'_> {
    fn fail(&self, stage: Stage, subject: Option<String>, message: impl std::fmt::Display) -> StageFailure {
        StageFailure {
            stage,
            subject,
            message: scrub(&message.to_string(), &self.work_dir),
        }
    }

    fn build_spec(&self) -> BuildSpec {
        BuildSpec {
            compiler: self.config.build.compiler.clone(),
            timeout: Duration::from_secs(self.config.build.timeout_secs),
            ..BuildSpec::default()
        }
    }
}

/// Include directories for a task: the directory of its contract header.
pub fn include_dirs(corpus: &Corpus, task: &Task) -> Vec<PathBuf> {
    match (&task.interface_contract.kind, &task.interface_contract.path) {
        (ContractKind::HeaderFile, Some(p)) => corpus
            .resolve(p)
            .parent()
            .map(|d| vec![d.to_path_buf()])
            .unwrap_or_default(),
        _ => Vec::new(),
    }
}

/// Harness from corpus-relative files plus the task's contract header.
pub fn harness_for(corpus: &Corpus, task: &Task, files: &[PathBuf]) -> Harness {
    let resolved: Vec<PathBuf> = files.iter().map(|f| corpus.resolve(f)).collect();
    let mut h = Harness::from_files(&resolved);
    for dir in include_dirs(corpus, task) {
        if !h.include_dirs.contains(&dir) {
            h.include_dirs.push(dir);
        }
    }
    h
}

/// Generates the LLM artifact for `task` from its description and contract.
pub fn generate_artifact(gateway: &Gateway, task: &Task) -> Result<CodeArtifact, String> {
    let record = gateway
        .generate(&build_generation_prompt(task))
        .map_err(|e| e.to_string())?;
    Ok(CodeArtifact {
        task_id: task.id.clone(),
        origin: Origin::Llm {
            model_id: record.model_id,
            prompt_hash: record.prompt_hash,
            timestamp: record.timestamp,
        },
        source_text: record.extracted_source,
    })
}

fn first_error(diagnostics: &str) -> String {
    diagnostics
        .lines()
        .find(|l| l.contains("error"))
        .unwrap_or("")
        .trim()
        .to_string()
}

/// Compiles the artifact with the harness of its first functional asset
/// (or none), without running anything.
pub fn build_artifact(ctx: &Context, task: &Task, artifact: &CodeArtifact) -> Result<BuildOutcome, String> {
    let files = task
        .unit_suite()
        .or_else(|| task.hash_vectors())
        .map(|(_, h)| h)
        .unwrap_or(&[]);
    let harness = harness_for(ctx.corpus, task, files);
    let dir = ctx.work_dir.join(artifact.id().replace('/', "_"));
    let built = compile(artifact, &harness, &ctx.build_spec(), &dir).map_err(|e| scrub(&e.to_string(), &ctx.work_dir))?;
    Ok(match built.status {
        BuildStatus::Ok { .. } => BuildOutcome::Ok,
        BuildStatus::CompileError {
            classification,
            diagnostics,
        } => BuildOutcome::CompileError {
            classification,
            first_error: scrub(&first_error(&diagnostics), &ctx.work_dir),
        },
    })
}

/// Build and validation results for one artifact.
#[derive(Debug, Default)]
pub struct Validation {
    pub build: Option<BuildOutcome>,
    pub verdict: Option<TestVerdict>,
    pub vectors: Option<VectorOutcome>,
}

/// Builds the artifact against each functional asset of the task and runs
/// the asset. A compile error is a verdict, not a failure.
pub fn build_and_validate(ctx: &Context, task: &Task, artifact: &CodeArtifact) -> (Validation, Failures) {
    let mut v = Validation::default();
    let mut failures = Vec::new();
    let id = artifact.id();
    let limits = ctx.config.validate.limits();
    let spec = ctx.build_spec();
    let mut assets: Vec<(&str, &[PathBuf])> = Vec::new();
    if let Some((_, harness)) = task.unit_suite() {
        assets.push(("suite", harness));
    }
    if let Some((_, harness)) = task.hash_vectors() {
        assets.push(("vectors", harness));
    }
    if assets.is_empty() {
        // Nothing to run; still report whether the artifact compiles.
        assets.push(("compile", &[]));
    }

    for (kind, files) in assets {
        let harness = harness_for(ctx.corpus, task, files);
        let dir = ctx.work_dir.join("build").join(kind);
        let built = match compile(artifact, &harness, &spec, &dir) {
            Ok(b) => b,
            Err(e) => {
                failures.push(ctx.fail(Stage::Build, Some(id.clone()), e));
                continue;
            }
        };
        let binary = match &built.status {
            BuildStatus::Ok { binary } => {
                v.build.get_or_insert(BuildOutcome::Ok);
                binary.clone()
            }
            BuildStatus::CompileError {
                classification,
                diagnostics,
            } => {
                v.build = Some(BuildOutcome::CompileError {
                    classification: *classification,
                    first_error: scrub(&first_error(diagnostics), &ctx.work_dir),
                });
                v.verdict.get_or_insert(TestVerdict::new(VerdictKind::CompileError, ""));
                continue;
            }
        };
        match kind {
            "suite" => {
                let (suite, _) = task.unit_suite().expect("asset present");
                let result = load_suite(&ctx.corpus.resolve(suite))
                    .and_then(|cases| run_unit_suite(&binary, &cases, &limits));
                match result {
                    Ok(results) => {
                        let mut verdict = suite_verdict(&results);
                        verdict.detail = scrub(&verdict.detail, &ctx.work_dir);
                        v.verdict = Some(verdict);
                    }
                    Err(e) => failures.push(ctx.fail(Stage::Validate, Some(id.clone()), e)),
                }
            }
            "vectors" => {
                let (path, _) = task.hash_vectors().expect("asset present");
                let algorithm = HashAlgorithm::infer(&path.to_string_lossy())
                    .or_else(|| HashAlgorithm::infer(&task.id))
                    .or_else(|| HashAlgorithm::infer(&task.title));
                let Some(algorithm) = algorithm else {
                    failures.push(ctx.fail(Stage::Validate, Some(id.clone()), "cannot tell the hash algorithm"));
                    continue;
                };
                let result = load_vectors(&ctx.corpus.resolve(path), algorithm)
                    .and_then(|set| validate_hash_vectors(&binary, &set, &limits));
                match result {
                    Ok(report) => {
                        let mut outcome = VectorOutcome::from_report(&report);
                        for f in &mut outcome.failures {
                            *f = scrub(f, &ctx.work_dir);
                        }
                        if v.verdict.is_none() {
                            v.verdict = Some(if report.all_passed() {
                                TestVerdict::new(VerdictKind::Accepted, "")
                            } else {
                                TestVerdict::new(
                                    VerdictKind::FailedTest {
                                        case_ids: outcome.failures.iter().map(|f| f.split(':').next().unwrap_or("").to_string()).collect(),
                                    },
                                    format!("{}/{} vectors passed", outcome.passed, outcome.total),
                                )
                            });
                        }
                        v.vectors = Some(outcome);
                    }
                    Err(e) => failures.push(ctx.fail(Stage::Validate, Some(id.clone()), e)),
                }
            }
            _ => {}
        }
    }
    (v, failures)
}

/// Fuzzes the artifact through its task's instruction grammar. `Ok(None)`
/// means the task has no grammar.
pub fn fuzz_artifact(ctx: &Context, task: &Task, artifact: &CodeArtifact) -> Result<Option<FuzzSummary>, String> {
    let Some(grammar_path) = task.grammar() else {
        return Ok(None);
    };
    let grammar = InstructionGrammar::load(&ctx.corpus.resolve(grammar_path)).map_err(|e| e.to_string())?;
    let entry = scaffold_entry_point(task, &grammar).map_err(|e| e.to_string())?;
    let fuzzer = ctx
        .config
        .fuzz
        .fuzzer
        .clone()
        .or_else(locate_fuzzer)
        .ok_or("afl-fuzz not found")?;
    let runtime = ctx
        .config
        .fuzz
        .runtime
        .clone()
        .or_else(locate_runtime)
        .ok_or("AFL compiler runtime not found")?;

    let dir = ctx.work_dir.join("fuzz").join(artifact.id().replace('/', "_"));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let entry_path = dir.join("entry.c");
    std::fs::write(&entry_path, entry).map_err(|e| e.to_string())?;
    let mut files: Vec<PathBuf> = task.interface_contract.path.iter().map(|p| ctx.corpus.resolve(p)).collect();
    files.push(entry_path);
    let mut harness = Harness::from_files(&files);
    harness.include_dirs.extend(include_dirs(ctx.corpus, task));
    let built = compile(artifact, &harness, &BuildSpec::fuzz(runtime), &dir.join("build")).map_err(|e| e.to_string())?;
    let Some(binary) = built.binary() else {
        return Ok(Some(FuzzSummary::NotApplicable {
            reason: "instrumented build failed".into(),
        }));
    };

    let dict = dir.join("dict.txt");
    write_dictionary(&dict, &dictionary_tokens(&grammar, &[&artifact.source_text])).map_err(|e| e.to_string())?;
    let mut cfg = FuzzConfig::new(fuzzer, Duration::from_secs(ctx.config.fuzz.seconds), dir.join("out"));
    cfg.exec_timeout = Duration::from_millis(ctx.config.fuzz.exec_timeout_ms);
    cfg.dictionary = Some(dict);
    let cell = FuzzCell::from_result(run_fuzzer(binary, &[make_seed(&grammar)], &cfg)).map_err(|e| e.to_string())?;
    Ok(Some(FuzzSummary::from(&cell)))
}

pub fn analyze_artifact(ctx: &Context, task: &Task, artifact: &CodeArtifact) -> Result<Vec<Finding>, String> {
    ctx.analyzer
        .analyze(&AnalysisInput {
            name: artifact.id(),
            source: artifact.source_text.clone(),
            include_dirs: include_dirs(ctx.corpus, task),
        })
        .map_err(|e| e.to_string())
}

/// Build, validate, fuzz (when enabled), analyze and measure one artifact.
pub fn evaluate_artifact(ctx: &Context, task: &Task, artifact: CodeArtifact) -> (ArtifactResult, Failures) {
    let id = artifact.id();
    let sub = Context {
        work_dir: ctx.work_dir.join(id.replace('/', "_")),
        ..*ctx
    };
    let (v, mut failures) = build_and_validate(&sub, task, &artifact);
    let fuzz = if ctx.config.fuzz.enabled {
        match fuzz_artifact(&sub, task, &artifact) {
            Ok(f) => f,
            Err(e) => {
                failures.push(sub.fail(Stage::Fuzz, Some(id.clone()), e));
                None
            }
        }
    } else {
        None
    };
    let findings = match analyze_artifact(&sub, task, &artifact) {
        Ok(f) => Some(f),
        Err(e) => {
            failures.push(sub.fail(Stage::Analyze, Some(id.clone()), e));
            None
        }
    };
    let metrics = MetricsRecord::measure(&id, artifact.origin.label(), &artifact.source_text);
    (
        ArtifactResult {
            artifact,
            build: v.build,
            verdict: v.verdict,
            vectors: v.vectors,
            fuzz,
            findings,
            metrics,
        },
        failures,
    )
}

/// Runs every per-task stage for the human reference and the generated
/// artifact.
pub fn run_task(ctx: &Context, task: &Task) -> (TaskResult, Failures) {
    let mut failures = Vec::new();
    let sub = Context {
        work_dir: ctx.work_dir.join(&task.id),
        ..*ctx
    };
    let human = match ctx.corpus.human_artifact(task) {
        Ok(a) => {
            let (r, f) = evaluate_artifact(&sub, task, a);
            failures.extend(f);
            Some(r)
        }
        Err(e) => {
            failures.push(ctx.fail(Stage::Corpus, Some(task.id.clone()), e));
            None
        }
    };
    let llm = match generate_artifact(ctx.gateway, task) {
        Ok(a) => {
            let (r, f) = evaluate_artifact(&sub, task, a);
            failures.extend(f);
            Some(r)
        }
        Err(e) => {
            failures.push(ctx.fail(Stage::Generate, Some(task.id.clone()), e));
            None
        }
    };
    let incomplete = human.is_none() && llm.is_none();
    (
        TaskResult {
            task_id: task.id.clone(),
            category: task.category,
            difficulty: task.difficulty,
            human,
            llm,
            incomplete,
        },
        failures,
    )
}

/// Probe runs for every configured family. Family `i` uses seed
/// `probe.seed + i`.
pub fn run_probes(ctx: &Context) -> (Vec<crate::probe::ProbeRun>, Failures) {
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let p = &ctx.config.probe;
    for (i, family) in p.families.iter().enumerate() {
        match run_probe(*family, p.trials.max(1), p.seed + i as u64, ctx.gateway) {
            Ok(r) => runs.push(r),
            Err(e) => failures.push(ctx.fail(Stage::Probe, Some(family.to_string()), e)),
        }
    }
    (runs, failures)
}

/// Loop files for every generated artifact that was analyzed.
pub fn loop_files(ctx: &Context, tasks: &[TaskResult]) -> BTreeMap<String, LoopFile> {
    tasks
        .iter()
        .filter_map(|t| {
            let llm = t.llm.as_ref()?;
            let findings = llm.findings.clone()?;
            let task = ctx.corpus.task(&t.task_id).ok()?.clone();
            Some((
                llm.id(),
                LoopFile {
                    include_dirs: include_dirs(ctx.corpus, &task),
                    task,
                    artifact: llm.artifact.clone(),
                    findings,
                },
            ))
        })
        .collect()
}

/// Category feedback loops and style loops over the generated artifacts.
pub fn run_loops(ctx: &Context, session: &mut Session) {
    let files = loop_files(ctx, &session.tasks);
    if ctx.config.feedback.enabled {
        let findings: BTreeMap<String, Vec<Finding>> =
            files.iter().map(|(k, f)| (k.clone(), f.findings.clone())).collect();
        let plans = match plan_loops(&findings, &ctx.config.feedback.categories, ctx.config.feedback.seed) {
            Ok(p) => p,
            Err(e) => {
                session.failures.push(ctx.fail(Stage::Loop, None, e));
                Default::default()
            }
        };
        for plan in &plans.plans {
            match run_loop(plan, &files, ctx.gateway, ctx.analyzer) {
                Ok(results) => {
                    for r in &results {
                        for f in r.files.iter().filter(|f| f.error.is_some()) {
                            let msg = f.error.as_deref().unwrap_or("");
                            session.failures.push(ctx.fail(Stage::Loop, Some(f.file.clone()), msg));
                        }
                    }
                    session.loops.extend(results);
                }
                Err(e) => session.failures.push(ctx.fail(Stage::Loop, None, e)),
            }
        }
        session.loop_plans = plans;
    }
    let all: Vec<&LoopFile> = files.values().collect();
    for constraint in &ctx.config.feedback.style_constraints {
        let results = run_style_loop(&all, *constraint, ctx.gateway, ctx.analyzer);
        for r in results.iter().filter(|r| r.error.is_some()) {
            let msg = r.error.as_deref().unwrap_or("");
            session.failures.push(ctx.fail(Stage::StyleLoop, Some(r.file.clone()), msg));
        }
        session.style.extend(results);
    }
}

/// The full pipeline. Stage failures are recorded and the run continues.
pub fn run_pipeline(ctx: &Context) -> Session {
    let corpus_hash = ctx.corpus.content_hash().unwrap_or_else(|_| "unhashable".into());
    let mut session = Session::new(ctx.config, &corpus_hash);

    if ctx.config.probe.enabled {
        let (runs, failures) = run_probes(ctx);
        session.probes = runs;
        session.failures.extend(failures);
    }

    // Per-task stages run in parallel; results are gathered in manifest order.
    let collected: Mutex<Vec<(usize, TaskResult, Failures)>> = Mutex::new(Vec::new());
    ctx.corpus.tasks.par_iter().enumerate().for_each(|(i, task)| {
        let (result, failures) = run_task(ctx, task);
        collected.lock().unwrap().push((i, result, failures));
    });
    let mut collected = collected.into_inner().unwrap();
    collected.sort_by_key(|(i, ..)| *i);
    for (_, result, failures) in collected {
        session.tasks.push(result);
        session.failures.extend(failures);
    }

    for task in &ctx.corpus.tasks {
        if let Some(path) = task.judge_verdicts() {
            match import_external_verdicts(&ctx.corpus.resolve(path)) {
                Ok(v) => session.imported_verdicts.extend(v),
                Err(e) => session.failures.push(ctx.fail(Stage::Validate, Some(task.id.clone()), e)),
            }
        }
    }

    let pairs: Vec<(&CodeArtifact, &CodeArtifact)> = session
        .tasks
        .iter()
        .filter_map(|t| Some((&t.llm.as_ref()?.artifact, &t.human.as_ref()?.artifact)))
        .collect();
    match flag_parroting(&pairs, ctx.config.parrot.threshold) {
        Ok(v) => session.parroting = v,
        Err(e) => session.failures.push(ctx.fail(Stage::Parrot, None, e)),
    }

    run_loops(ctx, &mut session);
    session.failures.sort();
    session
}

/// Writes every generated artifact's source to `<dir>/<task>.c`.
pub fn export_sources(session: &Session, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for t in &session.tasks {
        if let Some(llm) = &t.llm {
            std::fs::write(dir.join(format!("{}.c", t.task_id)), &llm.artifact.source_text)?;
        }
    }
    Ok(())
}

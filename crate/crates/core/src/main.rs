use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use codegauge::config::{Config, ReportFormat};
use codegauge::corpus::{load_corpus, CodeArtifact, Corpus, Task};
use codegauge::fuzz::{scaffold_entry_point, InstructionGrammar};
use codegauge::gateway::GenerationMode;
use codegauge::metrics::{summary_stats, write_csv, MetricsRecord};
use codegauge::pipeline::{
    analyze_artifact, build_and_validate, build_artifact, fuzz_artifact, generate_artifact, run_loops,
    run_pipeline, run_probes, Backends, Context,
};
use codegauge::report::emit_report;
use codegauge::session::{ArtifactResult, Session, TaskResult};
use codegauge::validator::import_external_verdicts;

#[derive(Parser)]
#[command(name = "codegauge", version, about = "Differential evaluation of LLM-generated and human-written C code")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Corpus directory holding manifest.toml.
    #[arg(long, global = true, default_value = "corpus")]
    corpus: PathBuf,
    /// Configuration file; defaults to <corpus>/harness.toml when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    cassette: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Enables fuzzing with this per-target budget.
    #[arg(long, global = true)]
    fuzz_seconds: Option<u64>,
    /// Trimmed-mean cut per tail, in percent.
    #[arg(long, global = true)]
    trim: Option<f64>,
    /// Comma-separated subset of md,csv,json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Scratch directory for builds and fuzzer output; a temporary
    /// directory by default.
    #[arg(long, global = true)]
    work: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Live,
    Record,
    Replay,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus maintenance.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Generates one artifact per task into <out>/generated.
    Generate,
    /// Runs the buffer-size probes.
    Probe,
    /// Compiles every artifact.
    Build,
    /// Builds and runs the functional tests.
    Test {
        /// External judge verdicts to import alongside.
        #[arg(long)]
        import: Option<PathBuf>,
    },
    /// Fuzz entry-point scaffolding and campaigns.
    #[command(subcommand)]
    Fuzz(FuzzCmd),
    /// Runs the static analyzer over every artifact.
    Analyze,
    /// Line counts and cyclomatic complexity.
    Metrics,
    /// Fix-prompt feedback loop on generated artifacts.
    Loop,
    /// Style-constraint regeneration loop.
    StyleLoop,
    /// Renders a stored session.
    Report {
        #[arg(long)]
        session: Option<PathBuf>,
    },
    /// Every stage, end to end.
    Pipeline,
}

#[derive(Subcommand)]
enum CorpusCmd {
    Validate,
}

#[derive(Subcommand)]
enum FuzzCmd {
    /// Writes the grammar-driven entry point for a task.
    Scaffold {
        #[arg(long)]
        task: String,
    },
    /// Fuzzes one artifact of a task.
    Run {
        #[arg(long)]
        task: String,
        #[arg(long, default_value = "llm")]
        origin: String,
    },
}

/// Exit status: 0 success, 1 partial, 2 configuration error.
enum Failure {
    Partial,
    Config(String),
}

type Outcome = Result<(), Failure>;

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn partial_if(partial: bool) -> Outcome {
    if partial {
        Err(Failure::Partial)
    } else {
        Ok(())
    }
}

fn load_config(g: &Global) -> Result<Config, Failure> {
    let path = g.config.clone().or_else(|| {
        let p = g.corpus.join("harness.toml");
        p.is_file().then_some(p)
    });
    let mut cfg = match path {
        Some(p) => Config::load(&p).map_err(config_err)?,
        None => Config::default(),
    };
    if let Some(m) = g.mode {
        cfg.gateway.mode = match m {
            Mode::Live => GenerationMode::Live,
            Mode::Record => GenerationMode::Record,
            Mode::Replay => GenerationMode::Replay,
        };
    }
    if let Some(c) = &g.cassette {
        cfg.gateway.cassette = Some(c.clone());
    }
    if let Some(s) = g.fuzz_seconds {
        cfg.fuzz.enabled = true;
        cfg.fuzz.seconds = s;
    }
    if let Some(t) = g.trim {
        cfg.metrics.trim = t / 100.0;
    }
    if let Some(f) = &g.format {
        cfg.report.formats = ReportFormat::parse_list(f).map_err(config_err)?;
    }
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

struct Env {
    corpus: Corpus,
    config: Config,
    backends: Backends,
    out: PathBuf,
    work: PathBuf,
    _scratch: Option<tempfile::TempDir>,
}

impl Env {
    fn open(g: &Global) -> Result<Env, Failure> {
        let config = load_config(g)?;
        let corpus = load_corpus(&g.corpus).map_err(config_err)?;
        let backends = Backends::open(&config, None).map_err(config_err)?;
        std::fs::create_dir_all(&g.out).map_err(config_err)?;
        let (work, scratch) = match &g.work {
            Some(w) => (w.clone(), None),
            None => {
                let t = tempfile::tempdir().map_err(config_err)?;
                (t.path().to_path_buf(), Some(t))
            }
        };
        Ok(Env {
            corpus,
            config,
            backends,
            out: g.out.clone(),
            work,
            _scratch: scratch,
        })
    }

    fn ctx(&self) -> Context<'_> {
        Context {
            corpus: &self.corpus,
            config: &self.config,
            gateway: &self.backends.gateway,
            analyzer: self.backends.analyzer(),
            work_dir: self.work.clone(),
        }
    }

    fn write_json<T: serde::Serialize>(&self, name: &str, value: &T) -> Outcome {
        let path = self.out.join(name);
        let text = serde_json::to_string_pretty(value).map_err(config_err)? + "\n";
        std::fs::write(&path, text).map_err(config_err)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn finish(&self) -> Outcome {
        self.backends.finish().map_err(config_err)
    }

    /// Generated artifacts from `<out>/generated.json`, generating any that
    /// are missing.
    fn generated(&self) -> (BTreeMap<String, CodeArtifact>, bool) {
        let path = self.out.join("generated.json");
        let mut map: BTreeMap<String, CodeArtifact> = std::fs::read_to_string(&path)
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default();
        let mut partial = false;
        for task in &self.corpus.tasks {
            if map.contains_key(&task.id) {
                continue;
            }
            match generate_artifact(&self.backends.gateway, task) {
                Ok(a) => {
                    map.insert(task.id.clone(), a);
                }
                Err(e) => {
                    warn!("{}: generation failed: {e}", task.id);
                    partial = true;
                }
            }
        }
        (map, partial)
    }

    /// Human and generated artifacts for every task.
    fn artifacts(&self) -> (Vec<(&Task, CodeArtifact)>, bool) {
        let (generated, mut partial) = self.generated();
        let mut out = Vec::new();
        for task in &self.corpus.tasks {
            match self.corpus.human_artifact(task) {
                Ok(a) => out.push((task, a)),
                Err(e) => {
                    warn!("{e}");
                    partial = true;
                }
            }
            if let Some(a) = generated.get(&task.id) {
                out.push((task, a.clone()));
            }
        }
        (out, partial)
    }
}

fn cmd_corpus_validate(g: &Global) -> Outcome {
    let corpus = load_corpus(&g.corpus).map_err(config_err)?;
    for t in &corpus.tasks {
        println!("{}\t{}\t{} assets", t.id, t.category.label(), t.test_assets.len());
    }
    println!("{} tasks valid", corpus.tasks.len());
    Ok(())
}

fn cmd_generate(env: &Env) -> Outcome {
    let dir = env.out.join("generated");
    std::fs::create_dir_all(&dir).map_err(config_err)?;
    let (map, partial) = env.generated();
    for (id, a) in &map {
        std::fs::write(dir.join(format!("{id}.c")), &a.source_text).map_err(config_err)?;
    }
    env.write_json("generated.json", &map)?;
    env.finish()?;
    partial_if(partial)
}

fn cmd_probe(env: &Env) -> Outcome {
    let (runs, failures) = run_probes(&env.ctx());
    for r in &runs {
        let s = &r.summary;
        println!("{:<30} truth {:>8}  {}/{} correct", s.family.to_string(), s.ground_truth, s.correct, s.trials);
    }
    for f in &failures {
        warn!("{}", f.message);
    }
    env.write_json("probe.json", &runs)?;
    env.finish()?;
    partial_if(!failures.is_empty())
}

fn cmd_build(env: &Env) -> Outcome {
    let (arts, mut partial) = env.artifacts();
    let ctx = env.ctx();
    let mut results = BTreeMap::new();
    for (task, a) in &arts {
        match build_artifact(&ctx, task, a) {
            Ok(b) => {
                println!("{}\t{:?}", a.id(), b);
                results.insert(a.id(), b);
            }
            Err(e) => {
                warn!("{}: {e}", a.id());
                partial = true;
            }
        }
    }
    env.write_json("build.json", &results)?;
    env.finish()?;
    partial_if(partial)
}

fn cmd_test(env: &Env, import: Option<&Path>) -> Outcome {
    let (arts, mut partial) = env.artifacts();
    let ctx = env.ctx();
    let mut verdicts = BTreeMap::new();
    for (task, a) in &arts {
        let (v, failures) = build_and_validate(&ctx, task, a);
        for f in &failures {
            warn!("{}: {}", a.id(), f.message);
        }
        partial |= !failures.is_empty();
        if let Some(verdict) = &v.verdict {
            println!("{}\t{}", a.id(), verdict.kind.label());
        }
        verdicts.insert(a.id(), v.verdict);
    }
    env.write_json("verdicts.json", &verdicts)?;
    if let Some(p) = import {
        let imported = import_external_verdicts(p).map_err(config_err)?;
        println!("imported {} judge verdicts", imported.len());
        env.write_json("imported_verdicts.json", &imported)?;
    }
    env.finish()?;
    partial_if(partial)
}

fn cmd_fuzz_scaffold(env: &Env, task_id: &str) -> Outcome {
    let task = env.corpus.task(task_id).map_err(config_err)?;
    let grammar_path = task
        .grammar()
        .ok_or_else(|| Failure::Config(format!("task {task_id} has no fuzz grammar")))?;
    let grammar = InstructionGrammar::load(&env.corpus.resolve(grammar_path)).map_err(config_err)?;
    let entry = scaffold_entry_point(task, &grammar).map_err(config_err)?;
    let path = env.out.join(format!("{task_id}_fuzz_entry.c"));
    std::fs::write(&path, entry).map_err(config_err)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_fuzz_run(env: &Env, task_id: &str, origin: &str) -> Outcome {
    let task = env.corpus.task(task_id).map_err(config_err)?;
    let artifact = match origin {
        "human" => env.corpus.human_artifact(task).map_err(config_err)?,
        "llm" => {
            let (map, _) = env.generated();
            map.get(task_id)
                .cloned()
                .ok_or_else(|| Failure::Config(format!("no generated artifact for {task_id}")))?
        }
        other => return Err(Failure::Config(format!("unknown origin `{other}`"))),
    };
    match fuzz_artifact(&env.ctx(), task, &artifact) {
        Ok(Some(summary)) => {
            println!("{}\t{}", artifact.id(), serde_json::to_string(&summary).unwrap_or_default());
            env.write_json(&format!("fuzz_{task_id}_{origin}.json"), &summary)?;
            env.finish()
        }
        Ok(None) => Err(Failure::Config(format!("task {task_id} has no fuzz grammar"))),
        Err(e) => {
            warn!("{e}");
            Err(Failure::Partial)
        }
    }
}

fn cmd_analyze(env: &Env) -> Outcome {
    let (arts, mut partial) = env.artifacts();
    let ctx = env.ctx();
    let mut findings = BTreeMap::new();
    for (task, a) in &arts {
        match analyze_artifact(&ctx, task, a) {
            Ok(f) => {
                println!("{}\t{} findings", a.id(), f.len());
                findings.insert(a.id(), f);
            }
            Err(e) => {
                warn!("{}: {e}", a.id());
                partial = true;
            }
        }
    }
    env.write_json("findings.json", &findings)?;
    env.finish()?;
    partial_if(partial)
}

fn cmd_metrics(env: &Env) -> Outcome {
    let (arts, partial) = env.artifacts();
    let records: Vec<MetricsRecord> = arts
        .iter()
        .map(|(_, a)| MetricsRecord::measure(a.id(), a.origin.label(), &a.source_text))
        .collect();
    let path = env.out.join("metrics.csv");
    let file = std::fs::File::create(&path).map_err(config_err)?;
    write_csv(&records, file).map_err(config_err)?;
    println!("wrote {}", path.display());
    for origin in ["llm", "human"] {
        let values: Vec<f64> = records.iter().filter(|r| r.origin == origin).map(|r| r.complexity as f64).collect();
        if let Ok(s) = summary_stats(&values, env.config.metrics.trim) {
            println!(
                "{origin}: complexity mean {:.2} median {:.2} trimmed {:.2}",
                s.mean, s.median, s.trimmed_mean
            );
        }
    }
    env.finish()?;
    partial_if(partial)
}

/// A session holding the generated artifacts and their findings, taken
/// from `<out>/findings.json` when present.
fn loop_session(env: &Env) -> (Session, bool) {
    let (generated, mut partial) = env.generated();
    let stored: BTreeMap<String, Vec<codegauge::sast::Finding>> = std::fs::read_to_string(env.out.join("findings.json"))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or_default();
    let ctx = env.ctx();
    let mut session = Session::new(&env.config, "");
    for task in &env.corpus.tasks {
        let Some(a) = generated.get(&task.id) else { continue };
        let findings = match stored.get(&a.id()) {
            Some(f) => Some(f.clone()),
            None => match analyze_artifact(&ctx, task, a) {
                Ok(f) => Some(f),
                Err(e) => {
                    warn!("{}: {e}", a.id());
                    partial = true;
                    None
                }
            },
        };
        session.tasks.push(TaskResult {
            task_id: task.id.clone(),
            category: task.category,
            difficulty: task.difficulty,
            human: None,
            llm: Some(ArtifactResult {
                metrics: MetricsRecord::measure(a.id(), a.origin.label(), &a.source_text),
                artifact: a.clone(),
                build: None,
                verdict: None,
                vectors: None,
                fuzz: None,
                findings,
            }),
            incomplete: false,
        });
    }
    (session, partial)
}

fn cmd_loop(env: &Env, style: bool) -> Outcome {
    let (mut session, partial) = loop_session(env);
    let mut config = env.config.clone();
    if style {
        config.feedback.enabled = false;
    } else {
        config.feedback.enabled = true;
        config.feedback.style_constraints.clear();
    }
    let ctx = Context {
        config: &config,
        ..env.ctx()
    };
    run_loops(&ctx, &mut session);
    for f in &session.failures {
        warn!("{:?}: {}", f.subject, f.message);
    }
    if style {
        for r in &session.style {
            println!("{}\t{}\t{:?}\t{:?}", r.file, r.constraint, r.complexity_delta, r.finding_delta);
        }
        env.write_json("style.json", &session.style)?;
    } else {
        for r in &session.loops {
            println!(
                "{}\t{:?}\t{} -> {}",
                r.category.loop_code().unwrap_or("?"),
                r.group,
                r.before_total(),
                r.after_total()
            );
        }
        for n in &session.loop_plans.notices {
            println!("{n}");
        }
        env.write_json("loops.json", &(&session.loop_plans, &session.loops))?;
    }
    env.finish()?;
    partial_if(partial || !session.failures.is_empty())
}

fn cmd_report(g: &Global, session: Option<&Path>) -> Outcome {
    let config = load_config(g)?;
    let path = session.map(Path::to_path_buf).unwrap_or_else(|| g.out.join("session.json"));
    let session = Session::load(&path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    for p in emit_report(&session, &config.report.formats, &g.out).map_err(config_err)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_pipeline(env: &Env) -> Outcome {
    let session = run_pipeline(&env.ctx());
    let path = env.out.join("session.json");
    session.save(&path).map_err(config_err)?;
    println!("wrote {}", path.display());
    for p in emit_report(&session, &env.config.report.formats, &env.out).map_err(config_err)? {
        println!("wrote {}", p.display());
    }
    for f in &session.failures {
        warn!("{:?} {}: {}", f.stage, f.subject.as_deref().unwrap_or("-"), f.message);
    }
    env.finish()?;
    info!("session {}", session.id);
    partial_if(session.is_partial())
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Corpus(CorpusCmd::Validate) => cmd_corpus_validate(g),
        Command::Report { session } => cmd_report(g, session.as_deref()),
        cmd => {
            let env = Env::open(g)?;
            match cmd {
                Command::Generate => cmd_generate(&env),
                Command::Probe => cmd_probe(&env),
                Command::Build => cmd_build(&env),
                Command::Test { import } => cmd_test(&env, import.as_deref()),
                Command::Fuzz(FuzzCmd::Scaffold { task }) => cmd_fuzz_scaffold(&env, task),
                Command::Fuzz(FuzzCmd::Run { task, origin }) => cmd_fuzz_run(&env, task, origin),
                Command::Analyze => cmd_analyze(&env),
                Command::Metrics => cmd_metrics(&env),
                Command::Loop => cmd_loop(&env, false),
                Command::StyleLoop => cmd_loop(&env, true),
                Command::Pipeline => cmd_pipeline(&env),
                Command::Corpus(_) | Command::Report { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Partial) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

//! The three-task fixture corpus, its replay configuration, and the scripted
//! model used to record the committed cassette.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use codegauge::config::Config;
use codegauge::corpus::{load_corpus, Corpus};
use codegauge::gateway::{
    build_fix_prompt, build_generation_prompt, build_style_prompt, ClientError, FnClient, ModelClient,
    StyleConstraint,
};
use codegauge::pipeline::{run_pipeline, Backends, Context};
use codegauge::probe::synthesize_probe;
use codegauge::sast::FindingCategory;
use codegauge::session::Session;

use super::fixtures::fixture;

pub fn corpus_dir() -> PathBuf {
    fixture("corpus")
}

pub fn corpus() -> Corpus {
    load_corpus(&corpus_dir()).unwrap()
}

pub fn config() -> Config {
    Config::load(&corpus_dir().join("harness.toml")).unwrap()
}

fn fenced(src: &str) -> String {
    format!("Here is the implementation.\n\n```c\n{src}```\n")
}

/// Scripted model: generation prompts answer with `corpus_llm/<task>.c`,
/// fix prompts with `<task>.fix_<code>.c` when present, style prompts with
/// the generated file, and probe prompts with a fixed rotation of answers.
pub fn scripted_client(corpus: &Corpus, config: &Config) -> Box<dyn ModelClient> {
    let llm = fixture("corpus_llm");
    let read = |name: &str| std::fs::read_to_string(llm.join(name)).ok();
    let mut answers: HashMap<String, String> = HashMap::new();
    for task in &corpus.tasks {
        let base = read(&format!("{}.c", task.id)).expect("fixture LLM output");
        answers.insert(build_generation_prompt(task).text, fenced(&base));
        for cat in FindingCategory::LOOP_CATEGORIES {
            let file = format!("{}.fix_{}.c", task.id, cat.loop_code().unwrap());
            let src = read(&file).unwrap_or_else(|| base.clone());
            answers.insert(build_fix_prompt(task, cat).unwrap().text, fenced(&src));
        }
        for c in StyleConstraint::ALL {
            answers.insert(build_style_prompt(task, c).text, fenced(&base));
        }
    }
    let mut truths: HashMap<String, u64> = HashMap::new();
    for (i, f) in config.probe.families.iter().enumerate() {
        let inst = synthesize_probe(*f, config.probe.seed + i as u64);
        truths.insert(inst.prompt_text(), inst.ground_truth);
    }
    let calls: Mutex<HashMap<String, u32>> = Mutex::new(HashMap::new());
    Box::new(FnClient(move |prompt: &str| {
        if let Some(a) = answers.get(prompt) {
            return Ok(a.clone());
        }
        let Some(truth) = truths.get(prompt) else {
            return Err(ClientError::Fatal("unscripted prompt".into()));
        };
        let mut calls = calls.lock().unwrap();
        let k = calls.entry(prompt.to_string()).or_default();
        *k += 1;
        Ok(match *k % 5 {
            1 | 2 | 3 => truth.to_string(),
            4 => (truth + 1).to_string(),
            _ => "The buffer size cannot be determined.".to_string(),
        })
    }))
}

/// One replay run of the fixture corpus with scratch space under `work`.
pub fn run_replay(work: &Path, config: &Config) -> Session {
    let corpus = corpus();
    let backends = Backends::open(config, None).unwrap();
    let ctx = Context {
        corpus: &corpus,
        config,
        gateway: &backends.gateway,
        analyzer: backends.analyzer(),
        work_dir: work.to_path_buf(),
    };
    run_pipeline(&ctx)
}

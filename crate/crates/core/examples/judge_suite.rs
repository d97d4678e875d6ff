//! Builds the human and generated stacks with the judge driver and runs
//! the unit suite against each. The generated pop underflows on an empty
//! stack, which the sanitizer reports.

use std::path::Path;

use codegauge::build::{compile, BuildSpec};
use codegauge::corpus::load_corpus;
use codegauge::exec::Limits;
use codegauge::pipeline::harness_for;
use codegauge::validator::{load_suite, run_unit_suite, suite_verdict};

pub fn run_example() -> Result<Vec<String>, Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus");
    let corpus = load_corpus(&root)?;
    let task = corpus.task("stack")?;
    let (suite, harness_files) = task.unit_suite().ok_or("no unit suite")?;
    let harness = harness_for(&corpus, task, harness_files);
    let cases = load_suite(&corpus.resolve(suite))?;
    let work = tempfile::tempdir()?;

    let human = corpus.human_artifact(task)?;
    let mut llm = human.clone();
    llm.origin = codegauge::corpus::Origin::Llm {
        model_id: "example".into(),
        prompt_hash: String::new(),
        timestamp: String::new(),
    };
    llm.source_text = std::fs::read_to_string(root.join("../corpus_llm/stack.c"))?;

    let mut labels = Vec::new();
    for artifact in [human, llm] {
        let built = compile(&artifact, &harness, &BuildSpec::default(), work.path())?;
        let binary = built.binary().ok_or("compile error")?;
        let results = run_unit_suite(binary, &cases, &Limits::default())?;
        let verdict = suite_verdict(&results);
        println!("{:<12} {} {}", artifact.id(), verdict.kind.label(), verdict.detail);
        labels.push(verdict.kind.label().to_string());
    }
    Ok(labels)
}

fn main() {
    run_example().unwrap();
}

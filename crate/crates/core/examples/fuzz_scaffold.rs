//! Generates the grammar-driven fuzz entry point for the stack task and,
//! when AFL++ is installed, fuzzes the generated stack for a few seconds.

use std::path::Path;
use std::time::Duration;

use codegauge::build::{compile, BuildSpec, Harness};
use codegauge::corpus::{load_corpus, CodeArtifact, Origin};
use codegauge::fuzz::{
    dictionary_tokens, locate_fuzzer, locate_runtime, make_seed, run_fuzzer, scaffold_entry_point,
    write_dictionary, FuzzConfig, InstructionGrammar,
};

pub fn run_example() -> Result<String, Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus");
    let corpus = load_corpus(&root)?;
    let task = corpus.task("stack")?;
    let grammar = InstructionGrammar::load(&corpus.resolve(task.grammar().ok_or("no grammar")?))?;
    let entry = scaffold_entry_point(task, &grammar)?;
    println!("{entry}");
    println!("seed input:\n{}", String::from_utf8_lossy(&make_seed(&grammar)));

    let seconds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let (Some(fuzzer), Some(runtime)) = (locate_fuzzer(), locate_runtime()) else {
        println!("afl-fuzz not found; skipping the campaign");
        return Ok(entry);
    };
    if seconds == 0 {
        println!("pass a duration in seconds to fuzz");
        return Ok(entry);
    }
    let work = tempfile::tempdir()?;
    let entry_path = work.path().join("entry.c");
    std::fs::write(&entry_path, &entry)?;
    let contract = corpus.resolve(task.interface_contract.path.as_ref().ok_or("no header")?);
    let harness = Harness::from_files(&[contract, entry_path]);
    let artifact = CodeArtifact {
        task_id: "stack".into(),
        origin: Origin::Human,
        source_text: std::fs::read_to_string(root.join("../corpus_llm/stack.c"))?,
    };
    let built = compile(&artifact, &harness, &BuildSpec::fuzz(runtime), work.path())?;
    let dict = work.path().join("dict.txt");
    write_dictionary(&dict, &dictionary_tokens(&grammar, &[&artifact.source_text]))?;
    let mut cfg = FuzzConfig::new(fuzzer, Duration::from_secs(seconds), work.path().join("out"));
    cfg.dictionary = Some(dict);
    let outcome = run_fuzzer(built.binary().ok_or("compile error")?, &[make_seed(&grammar)], &cfg)?;
    println!(
        "{} executions, {} unique crashes, {} unique hangs",
        outcome.total_executions, outcome.unique_crashes, outcome.unique_hangs
    );
    Ok(entry)
}

fn main() {
    run_example().unwrap();
}

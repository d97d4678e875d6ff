//! Generates code for a task from a recorded cassette. Replay mode never
//! touches the network.

use std::path::Path;

use codegauge::corpus::load_corpus;
use codegauge::gateway::{build_generation_prompt, Cassette, Gateway};

pub fn run_example() -> Result<String, Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus");
    let corpus = load_corpus(&root)?;
    let gateway = Gateway::replay("fixture-model", Cassette::open(&root.join("cassette.json"))?);
    let task = corpus.task("two_sum")?;
    let prompt = build_generation_prompt(task);
    let record = gateway.generate(&prompt)?;
    println!("prompt hash {}", record.prompt_hash);
    println!("{}", record.extracted_source);
    Ok(record.extracted_source)
}

fn main() {
    run_example().unwrap();
}

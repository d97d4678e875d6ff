//! Loads a corpus manifest and lists each task with its test assets.

use std::path::Path;

use codegauge::corpus::load_corpus;

pub fn run_example() -> Result<usize, Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus");
    let corpus = load_corpus(&root)?;
    for task in &corpus.tasks {
        println!(
            "{:<8} {:<24} contract={:?} assets={}",
            task.id,
            task.category.label(),
            task.interface_contract.kind,
            task.test_assets.len()
        );
    }
    println!("corpus hash {}", corpus.content_hash()?);
    Ok(corpus.tasks.len())
}

fn main() {
    run_example().unwrap();
}

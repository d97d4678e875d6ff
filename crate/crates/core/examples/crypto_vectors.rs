//! Checks a SHA-1 implementation against digest vectors.

use std::path::Path;

use codegauge::build::{compile, BuildSpec};
use codegauge::corpus::load_corpus;
use codegauge::exec::Limits;
use codegauge::pipeline::harness_for;
use codegauge::validator::{load_vectors, validate_hash_vectors, HashAlgorithm};

pub fn run_example() -> Result<(usize, usize), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus");
    let corpus = load_corpus(&root)?;
    let task = corpus.task("sha1")?;
    let (vectors, harness_files) = task.hash_vectors().ok_or("no vectors")?;
    let harness = harness_for(&corpus, task, harness_files);
    let work = tempfile::tempdir()?;
    let built = compile(&corpus.human_artifact(task)?, &harness, &BuildSpec::default(), work.path())?;
    let set = load_vectors(&corpus.resolve(vectors), HashAlgorithm::Sha1)?;
    let report = validate_hash_vectors(built.binary().ok_or("compile error")?, &set, &Limits::default())?;
    println!("{}/{} vectors passed", report.passed(), report.total());
    Ok((report.passed(), report.total()))
}

fn main() {
    run_example().unwrap();
}

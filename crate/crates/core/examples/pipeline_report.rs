//! Runs every stage over the fixture corpus in replay mode and prints the
//! Markdown report.

use std::path::Path;

use codegauge::config::Config;
use codegauge::corpus::load_corpus;
use codegauge::pipeline::{run_pipeline, Backends, Context};
use codegauge::report::Report;

pub fn run_example() -> Result<Report, Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus");
    let corpus = load_corpus(&root)?;
    let config = Config::load(&root.join("harness.toml"))?;
    let backends = Backends::open(&config, None)?;
    let work = tempfile::tempdir()?;
    let ctx = Context {
        corpus: &corpus,
        config: &config,
        gateway: &backends.gateway,
        analyzer: backends.analyzer(),
        work_dir: work.path().to_path_buf(),
    };
    let session = run_pipeline(&ctx);
    let report = Report::from_session(&session);
    println!("{}", report.to_markdown());
    Ok(report)
}

fn main() {
    run_example().unwrap();
}

//! One round of the fix-prompt feedback loop over recorded generations and
//! recorded analyzer findings.

use std::collections::BTreeMap;
use std::path::Path;

use codegauge::corpus::load_corpus;
use codegauge::feedback::{plan_loops, run_loop, LoopFile};
use codegauge::gateway::{Cassette, Gateway};
use codegauge::pipeline::{analyze_artifact, generate_artifact, include_dirs, Context};
use codegauge::sast::{FindingCategory, RecordedAnalyzer};

pub fn run_example() -> Result<Vec<(u64, u64)>, Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus");
    let corpus = load_corpus(&root)?;
    let config = codegauge::config::Config::load(&root.join("harness.toml"))?;
    let gateway = Gateway::replay("fixture-model", Cassette::open(&root.join("cassette.json"))?);
    let analyzer = RecordedAnalyzer::load(&root.join("analysis.json"))?;
    let ctx = Context {
        corpus: &corpus,
        config: &config,
        gateway: &gateway,
        analyzer: &analyzer,
        work_dir: std::env::temp_dir(),
    };

    let mut files = BTreeMap::new();
    for task in &corpus.tasks {
        let artifact = generate_artifact(&gateway, task)?;
        let findings = analyze_artifact(&ctx, task, &artifact)?;
        files.insert(
            artifact.id(),
            LoopFile {
                task: task.clone(),
                include_dirs: include_dirs(&corpus, task),
                artifact,
                findings,
            },
        );
    }
    let findings = files.iter().map(|(k, f)| (k.clone(), f.findings.clone())).collect();
    let plans = plan_loops(&findings, &FindingCategory::LOOP_CATEGORIES, 2024)?;
    for n in &plans.notices {
        println!("{n}");
    }
    let mut totals = Vec::new();
    for plan in &plans.plans {
        for r in run_loop(plan, &files, &gateway, &analyzer)? {
            println!(
                "{} {:?}: before {} after {} ({:?})",
                plan.category.loop_code().unwrap_or("?"),
                r.group,
                r.before_total(),
                r.after_total(),
                r.diff_total()
            );
            totals.push((r.before_total(), r.after_total()));
        }
    }
    Ok(totals)
}

fn main() {
    run_example().unwrap();
}

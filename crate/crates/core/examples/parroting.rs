//! Token-level similarity between generated and human code.

use std::path::Path;

use codegauge::corpus::{CodeArtifact, Origin};
use codegauge::parrot::{flag_parroting, DEFAULT_THRESHOLD};

pub fn run_example() -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let load = |task: &str, origin: Origin, rel: &str| -> std::io::Result<CodeArtifact> {
        Ok(CodeArtifact {
            task_id: task.into(),
            origin,
            source_text: std::fs::read_to_string(root.join(rel))?,
        })
    };
    let llm = || Origin::Llm {
        model_id: "fixture".into(),
        prompt_hash: String::new(),
        timestamp: String::new(),
    };
    let mut pairs = Vec::new();
    for task in ["two_sum", "stack", "sha1"] {
        pairs.push((
            load(task, llm(), &format!("corpus_llm/{task}.c"))?,
            load(task, Origin::Human, &format!("corpus/tasks/{task}/human.c"))?,
        ));
    }
    let refs: Vec<_> = pairs.iter().map(|(a, b)| (a, b)).collect();
    let verdicts = flag_parroting(&refs, DEFAULT_THRESHOLD)?;
    for v in &verdicts {
        println!("{:<12} vs {:<14} {:.4} {}", v.llm_id, v.human_id, v.similarity, v.verdict.label());
    }
    Ok(verdicts.iter().map(|v| v.similarity).collect())
}

fn main() {
    run_example().unwrap();
}

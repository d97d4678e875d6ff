//! Line counts, cyclomatic complexity and summary statistics for the
//! fixture corpus sources.

use std::path::Path;

use codegauge::metrics::{summary_stats, MetricsRecord};

pub fn run_example() -> Result<usize, Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut records = Vec::new();
    for (origin, dir) in [("human", "corpus/tasks"), ("llm", "corpus_llm")] {
        let mut files: Vec<_> = walk(&root.join(dir))?;
        files.sort();
        for f in files.iter().filter(|f| f.ends_with("human.c") || origin == "llm") {
            let name = f.strip_prefix(&root)?.display().to_string();
            records.push(MetricsRecord::measure(name, origin, &std::fs::read_to_string(f)?));
        }
    }
    for r in &records {
        println!(
            "{:<40} code {:>3} comment {:>2} blank {:>2} complexity {:>2}",
            r.file, r.lines.code, r.lines.comment, r.lines.blank, r.complexity
        );
    }
    let values: Vec<f64> = records.iter().map(|r| r.complexity as f64).collect();
    let s = summary_stats(&values, 0.1)?;
    println!(
        "mean {:.2} median {:.2} geometric {:?} trimmed(10%) {:.2}",
        s.mean, s.median, s.geometric_mean, s.trimmed_mean
    );
    Ok(records.len())
}

fn walk(dir: &Path) -> std::io::Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir)? {
        let p = e?.path();
        if p.is_dir() {
            out.extend(walk(&p)?);
        } else if p.extension().is_some_and(|x| x == "c") {
            out.push(p);
        }
    }
    Ok(out)
}

fn main() {
    run_example().unwrap();
}

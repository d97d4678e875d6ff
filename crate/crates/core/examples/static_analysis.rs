//! Runs the clang static analyzer on an unchecked allocation and prints the
//! categorized findings as a count table.

use std::path::Path;

use codegauge::sast::{aggregate, AnalysisInput, Analyzer, ClangAnalyzer};

pub fn run_example() -> Result<u64, Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sast/malloc_overflow.c");
    let input = AnalysisInput {
        name: "malloc_overflow.c".into(),
        source: std::fs::read_to_string(path)?,
        include_dirs: Vec::new(),
    };
    let findings = ClangAnalyzer::default().analyze(&input)?;
    for f in &findings {
        println!("{}:{}:{} {:?} {}", f.file, f.line, f.column, f.category, f.message);
    }
    let table = aggregate([("example", findings.as_slice())]);
    for row in table.rows.iter().filter(|r| r.counts[0] > 0) {
        println!("{:<48} {}", row.category.label(), row.counts[0]);
    }
    println!("{:<48} {}", "Total", table.totals[0]);
    Ok(table.totals[0])
}

fn main() {
    run_example().unwrap();
}

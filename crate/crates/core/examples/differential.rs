//! Runs two builds of a number-summing program on random inputs and reports
//! where their outputs differ. The second build drops negative numbers.

use std::path::{Path, PathBuf};

use codegauge::build::{compile, BuildSpec, Harness};
use codegauge::corpus::{CodeArtifact, Origin};
use codegauge::exec::Limits;
use codegauge::validator::{random_inputs, run_differential};

const SUM: &str = r#"#include <stdio.h>
int main(void)
{
    long v, sum = 0;
    for (;;) {
        int r = scanf("%ld", &v);
        if (r == EOF)
            break;
        if (r == 0) {
            getchar();
            continue;
        }
        if (KEEP(v))
            sum += v;
    }
    printf("%ld\n", sum);
    return 0;
}
"#;

fn build(work: &Path, name: &str, keep: &str) -> Result<PathBuf, Box<dyn std::error::Error>> {
    let artifact = CodeArtifact {
        task_id: name.into(),
        origin: Origin::Human,
        source_text: SUM.replace("KEEP(v)", keep),
    };
    let built = compile(&artifact, &Harness::default(), &BuildSpec::unsanitized(), work)?;
    Ok(built.binary().ok_or("compile error")?.to_path_buf())
}

pub fn run_example() -> Result<(usize, usize), Box<dyn std::error::Error>> {
    let work = tempfile::tempdir()?;
    let reference = build(work.path(), "sum", "1")?;
    let twin = build(work.path(), "twin", "1")?;
    let mutant = build(work.path(), "mutant", "v >= 0")?;
    let inputs = random_inputs(200, 11, 4);
    let same = run_differential(&reference, &twin, &inputs, &Limits::default())?;
    let diff = run_differential(&reference, &mutant, &inputs, &Limits::default())?;
    println!("twin:   {} discrepancies", same.discrepancies.len());
    println!("mutant: {} discrepancies", diff.discrepancies.len());
    if let Some(d) = diff.discrepancies.first() {
        println!("first: input {:?}", String::from_utf8_lossy(&d.input));
    }
    Ok((same.discrepancies.len(), diff.discrepancies.len()))
}

fn main() {
    run_example().unwrap();
}

//! Compiles each probe program's size definition with the host C compiler
//! and reads back the value C assigns to the buffer size.

use std::path::Path;
use std::process::Command;

use codegauge::probe::ProbeInstance;

/// Definition lines and malloc size expression, cut from the program text.
fn size_definition(source: &str) -> (Vec<String>, String) {
    let lines: Vec<&str> = source.lines().collect();
    let start = lines.iter().position(|l| l.starts_with("int main() {")).unwrap() + 1;
    let end = lines
        .iter()
        .position(|l| l.trim_start().starts_with("char *buffer ="))
        .unwrap();
    let alloc = lines.iter().find(|l| l.contains("malloc(")).unwrap();
    let expr = alloc
        .split("malloc(")
        .nth(1)
        .unwrap()
        .strip_suffix("*sizeof(char));")
        .unwrap()
        .to_string();
    (lines[start..end].iter().map(|l| l.to_string()).collect(), expr)
}

/// Values C computes for each instance, in order. `None` when no compiler.
pub fn c_sizes(instances: &[ProbeInstance], work: &Path) -> Option<Vec<u64>> {
    let mut src = String::from("#include <math.h>\n#include <stdio.h>\n\n");
    for (i, inst) in instances.iter().enumerate() {
        let (defs, expr) = size_definition(&inst.source_text);
        src.push_str(&format!("static long probe_{i}(void) {{\n"));
        for d in defs {
            src.push_str(&d);
            src.push('\n');
        }
        src.push_str(&format!("return (long)({expr});\n}}\n"));
    }
    src.push_str("int main(void) {\n");
    for i in 0..instances.len() {
        src.push_str(&format!("printf(\"%ld\\n\", probe_{i}());\n"));
    }
    src.push_str("return 0;\n}\n");
    let c = work.join("oracle.c");
    let bin = work.join("oracle");
    std::fs::write(&c, src).unwrap();
    let status = Command::new("cc")
        .args(["-O0", "-o"])
        .arg(&bin)
        .arg(&c)
        .arg("-lm")
        .status()
        .ok()?;
    assert!(status.success(), "oracle program failed to compile");
    let out = Command::new(&bin).output().unwrap();
    Some(
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .map(|l| l.parse().unwrap())
            .collect(),
    )
}

/// Whether the program compiles once the blank holds an integer literal.
pub fn compiles_when_filled(inst: &ProbeInstance, work: &Path) -> bool {
    let c = work.join("filled.c");
    std::fs::write(&c, inst.filled("17")).unwrap();
    Command::new("cc")
        .args(["-fsyntax-only", "-Werror=implicit-function-declaration"])
        .arg(&c)
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

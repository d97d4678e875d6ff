//! Builds C fixtures through the library's build runner.

use std::path::{Path, PathBuf};

use codegauge::build::{compile, BuildSpec, Harness};
use codegauge::corpus::{CodeArtifact, Origin};

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

/// Compiles `main_src` with extra harness files into `work`; panics on
/// compile errors so fixture breakage is loud.
pub fn build(work: &Path, name: &str, main_src: &str, harness: &[PathBuf], spec: &BuildSpec) -> PathBuf {
    let artifact = CodeArtifact {
        task_id: name.to_string(),
        origin: Origin::Human,
        source_text: main_src.to_string(),
    };
    let result = compile(&artifact, &Harness::from_files(harness), spec, work).unwrap();
    match result.binary() {
        Some(b) => b.to_path_buf(),
        None => panic!("fixture {name} failed to build: {:?}", result.status),
    }
}

pub fn build_file(work: &Path, name: &str, rel: &str, defines: &[&str], sanitized: bool) -> PathBuf {
    let mut spec = if sanitized {
        BuildSpec::default()
    } else {
        BuildSpec::unsanitized()
    };
    spec.flags.extend(defines.iter().map(|d| format!("-D{d}")));
    let src = std::fs::read_to_string(fixture(rel)).unwrap();
    build(work, name, &src, &[], &spec)
}

pub fn sha1_binary(work: &Path, name: &str, mutate: bool) -> PathBuf {
    let mut src = std::fs::read_to_string(fixture("crypto/sha1.c")).unwrap();
    if mutate {
        assert!(src.contains("0x5A827999"));
        src = src.replace("0x5A827999", "0x5A827998");
    }
    build(
        work,
        name,
        &src,
        &[fixture("crypto/sha1.h"), fixture("crypto/sha1_main.c")],
        &BuildSpec::unsanitized(),
    )
}

pub fn aes_binary(work: &Path, name: &str) -> PathBuf {
    let src = std::fs::read_to_string(fixture("crypto/aes.c")).unwrap();
    build(
        work,
        name,
        &src,
        &[fixture("crypto/aes.h"), fixture("crypto/aes_main.c")],
        &BuildSpec::unsanitized(),
    )
}

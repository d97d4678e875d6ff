mod common;

use std::time::Duration;

use codegauge::exec::Limits;
use codegauge::validator::{
    import_external_verdicts, load_roundtrip, load_suite, load_vectors, random_inputs,
    run_differential, run_unit_suite, validate_hash_vectors, validate_roundtrip, ExitClass,
    HashAlgorithm, RoundTripEntry, RuntimeSubtype, ValidationError, VerdictKind,
};
use common::fixtures::{aes_binary, build, build_file, fixture, sha1_binary};

fn limits() -> Limits {
    Limits {
        wall: Duration::from_secs(2),
        memory: Some(256 << 20),
    }
}

#[test]
fn passing_suite_is_accepted() {
    let work = tempfile::tempdir().unwrap();
    let bin = build_file(work.path(), "doubler", "runtime/doubler.c", &[], true);
    let suite = load_suite(&fixture("runtime/doubler_suite.toml")).unwrap();
    let results = run_unit_suite(&bin, &suite, &limits()).unwrap();
    assert_eq!(results.len(), 4);
    for r in results {
        assert_eq!(r.verdict.kind, VerdictKind::Accepted, "{}", r.case_id);
    }
}

#[test]
fn infinite_loop_times_out() {
    let work = tempfile::tempdir().unwrap();
    let bin = build_file(work.path(), "spin", "runtime/spin.c", &[], false);
    let suite = load_suite(&fixture("runtime/doubler_suite.toml")).unwrap();
    let limits = Limits {
        wall: Duration::from_secs(1),
        memory: None,
    };
    let results = run_unit_suite(&bin, &suite[..1], &limits).unwrap();
    assert_eq!(results[0].verdict.kind, VerdictKind::TimeLimitExceeded);
}

#[test]
fn asan_heap_overflow_is_classified() {
    let work = tempfile::tempdir().unwrap();
    let bin = build_file(work.path(), "heap", "runtime/heap_overflow.c", &[], true);
    let suite = vec![codegauge::validator::TestCase {
        id: "five".into(),
        kind: codegauge::validator::CaseKind::Regular,
        input: "5\n".into(),
        expected: "10\n".into(),
    }];
    let results = run_unit_suite(&bin, &suite, &limits()).unwrap();
    assert_eq!(
        results[0].verdict.kind,
        VerdictKind::RuntimeError {
            subtype: RuntimeSubtype::HeapBufferOverflow
        }
    );
    assert!(results[0].verdict.detail.contains("heap-buffer-overflow"));
}

#[test]
fn ubsan_signed_overflow_is_classified() {
    let work = tempfile::tempdir().unwrap();
    let bin = build_file(work.path(), "ovf", "runtime/signed_overflow.c", &[], true);
    let suite = vec![codegauge::validator::TestCase {
        id: "max".into(),
        kind: codegauge::validator::CaseKind::Edge,
        input: "2147483647\n".into(),
        expected: "".into(),
    }];
    let results = run_unit_suite(&bin, &suite, &limits()).unwrap();
    assert_eq!(
        results[0].verdict.kind,
        VerdictKind::RuntimeError {
            subtype: RuntimeSubtype::SignedIntegerOverflow
        }
    );
}

#[test]
fn missing_binary_is_an_error() {
    let err = run_unit_suite(std::path::Path::new("/nonexistent/bin"), &[], &limits()).unwrap_err();
    assert!(matches!(err, ValidationError::BinaryMissing(_)));
}

#[test]
fn differential_reflexive_crash_and_single_mutation() {
    let work = tempfile::tempdir().unwrap();
    let base = build_file(work.path(), "base", "runtime/doubler.c", &[], false);
    let crash = build_file(work.path(), "crash", "runtime/doubler.c", &["CRASH_ON_BOOM"], false);
    let magic = build_file(work.path(), "magic", "runtime/doubler.c", &["MUTATE_MAGIC"], false);

    let inputs = random_inputs(200, 11, 4);
    let same = run_differential(&base, &base, &inputs, &limits()).unwrap();
    assert_eq!(same.inputs_tried, 200);
    assert!(same.discrepancies.is_empty());

    let boom = vec![b"push 1\n".to_vec(), b"boom\n".to_vec(), b"3\n".to_vec()];
    let r = run_differential(&base, &crash, &boom, &limits()).unwrap();
    assert_eq!(r.discrepancies.len(), 1);
    assert_eq!(r.discrepancies[0].input, b"boom\n");
    assert_eq!(
        (r.discrepancies[0].a.exit, r.discrepancies[0].b.exit),
        (ExitClass::Ok, ExitClass::Crash)
    );

    let mut inputs = random_inputs(50, 12, 3);
    inputs.push(b"magic\n".to_vec());
    let r = run_differential(&base, &magic, &inputs, &limits()).unwrap();
    assert_eq!(r.discrepancies.len(), 1);

    // Swapping sides swaps outcome columns, same inputs.
    let swapped = run_differential(&magic, &base, &inputs, &limits()).unwrap();
    assert_eq!(swapped.discrepancies[0].input, r.discrepancies[0].input);
    assert_eq!(swapped.discrepancies[0].a, r.discrepancies[0].b);
}

#[test]
fn sha1_vectors_reference_and_mutant() {
    let work = tempfile::tempdir().unwrap();
    let set = load_vectors(&fixture("crypto/sha1_vectors.tsv"), HashAlgorithm::Sha1).unwrap();
    assert!(set.entries.len() >= 10);
    let good = sha1_binary(work.path(), "sha1", false);
    let report = validate_hash_vectors(&good, &set, &limits()).unwrap();
    assert!(report.all_passed(), "{report:?}");
    let again = validate_hash_vectors(&good, &set, &limits()).unwrap();
    assert_eq!(report, again);

    let bad = sha1_binary(work.path(), "sha1-mutant", true);
    let report = validate_hash_vectors(&bad, &set, &limits()).unwrap();
    assert_eq!(report.passed(), 0);
}

#[test]
fn aes_roundtrip_and_known_answers() {
    let work = tempfile::tempdir().unwrap();
    let bin = aes_binary(work.path(), "aes");
    let entries = load_roundtrip(&fixture("crypto/aes_roundtrip.tsv")).unwrap();
    assert_eq!(entries.len(), 16);
    let report = validate_roundtrip(&bin, &entries, &limits()).unwrap();
    assert!(report.all_passed(), "{report:?}");

    let kat = std::fs::read_to_string(fixture("crypto/aes_kat.tsv")).unwrap();
    for line in kat.lines().filter(|l| !l.starts_with('#')) {
        let cols: Vec<&str> = line.split('\t').collect();
        let out = std::process::Command::new(&bin)
            .args(["encrypt", cols[0]])
            .stdin(std::process::Stdio::piped())
            .stdout(std::process::Stdio::piped())
            .spawn()
            .and_then(|mut c| {
                use std::io::Write;
                c.stdin.take().unwrap().write_all(cols[1].as_bytes())?;
                c.wait_with_output()
            })
            .unwrap();
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(&text[..32], cols[2]);
    }
}

#[test]
fn identity_and_truncating_codecs() {
    let work = tempfile::tempdir().unwrap();
    let identity = "#include <stdio.h>\nint main(void){int c;while((c=getchar())!=EOF)putchar(c);return 0;}\n";
    let truncating = "#include <stdio.h>\n#include <string.h>\nint main(int argc,char**argv){char b[4096];size_t n=fread(b,1,sizeof b,stdin);while(n&&(b[n-1]=='\\n'))n--;if(strcmp(argv[1],\"encrypt\")==0&&n>=2)n-=2;fwrite(b,1,n,stdout);return 0;}\n";
    let spec = codegauge::build::BuildSpec::unsanitized();
    let id = build(work.path(), "identity", identity, &[], &spec);
    let tr = build(work.path(), "truncating", truncating, &[], &spec);
    let entries: Vec<RoundTripEntry> = (1..=5u8)
        .map(|n| RoundTripEntry {
            key: vec![0; 16],
            plaintext: (0..n).collect(),
        })
        .collect();
    assert!(validate_roundtrip(&id, &entries, &limits()).unwrap().all_passed());
    let report = validate_roundtrip(&tr, &entries, &limits()).unwrap();
    assert_eq!(report.passed(), 0);
}

#[test]
fn judge_verdict_fixture_imports() {
    let verdicts = import_external_verdicts(&fixture("verdicts/leetcode_failures.csv")).unwrap();
    assert_eq!(verdicts.len(), 25);
    let count = |label: &str| verdicts.iter().filter(|v| v.verdict.kind.label() == label).count();
    assert_eq!(count("Time Limit Exceeded"), 2);
    assert_eq!(count("Runtime Error"), 12);
    assert_eq!(count("Failed Test Case"), 7);
    assert_eq!(count("Compile Error"), 4);
    let signed = verdicts
        .iter()
        .filter(|v| {
            v.verdict.kind
                == VerdictKind::RuntimeError {
                    subtype: RuntimeSubtype::SignedIntegerOverflow,
                }
        })
        .count();
    assert_eq!(signed, 4);
}

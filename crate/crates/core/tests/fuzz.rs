mod common;

use std::process::Command;
use std::time::Duration;

use codegauge::build::BuildSpec;
use codegauge::fuzz::{
    locate_fuzzer, locate_runtime, make_seed, run_fuzzer, scaffold_entry_point, FuzzCell, FuzzConfig,
    FuzzError, InstructionGrammar,
};
use common::fuzz_fixtures::{build_batch_driver, build_scaffolded, stack_grammar, stack_task};
use proptest::prelude::*;

fn run_on(bin: &std::path::Path, input: &[u8]) -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("in.txt");
    std::fs::write(&file, input).unwrap();
    let out = Command::new(bin).arg(&file).output().unwrap();
    (out.status.success(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn dispatches_known_lines_and_skips_the_rest() {
    let work = tempfile::tempdir().unwrap();
    let bin = build_scaffolded(work.path(), "trace", "fuzz/trace_stack.c", &[], BuildSpec::default());
    let input = b"push 10\nfrobnicate 5\npop\npush 99999999999999999999\npush 1 2\npush x\n\t size \r\npeek\n";
    let (ok, out) = run_on(&bin, input);
    assert!(ok);
    assert_eq!(out, "push 10\npop\nsize\npeek\n");

    let (ok, out) = run_on(&bin, b"");
    assert!(ok);
    assert_eq!(out, "");

    // Seed round trip: every seed line dispatches.
    let seed = make_seed(&stack_grammar());
    let (_, out) = run_on(&bin, &seed);
    assert_eq!(out.lines().count(), stack_grammar().instructions.len());
}

#[test]
fn overlong_lines_are_skipped() {
    let work = tempfile::tempdir().unwrap();
    let bin = build_scaffolded(work.path(), "trace", "fuzz/trace_stack.c", &[], BuildSpec::default());
    let mut input = b"push ".to_vec();
    input.extend(std::iter::repeat(b'1').take(10_000));
    input.extend_from_slice(b"\npush 3\n");
    let (ok, out) = run_on(&bin, &input);
    assert!(ok);
    assert_eq!(out, "push 3\n");
}

#[test]
fn scaffold_rejects_grammar_outside_contract() {
    let g = InstructionGrammar::parse("@include \"stack.h\"\nfrob 1 => frobnicate($1)\n").unwrap();
    assert!(matches!(
        scaffold_entry_point(&stack_task(), &g),
        Err(FuzzError::UnknownFunction(_))
    ));
    let mut no_contract = stack_task();
    no_contract.interface_contract = codegauge::corpus::InterfaceContract::none();
    assert!(matches!(
        scaffold_entry_point(&no_contract, &stack_grammar()),
        Err(FuzzError::NoContract(_))
    ));
}

#[test]
fn random_bytes_never_fault() {
    let work = tempfile::tempdir().unwrap();
    let bin = build_batch_driver(work.path(), "fuzz/trace_stack.c");
    let files = common::write_random_files(work.path(), 500, 3);
    let out = Command::new(&bin).args(&files).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn garbage_line() -> impl Strategy<Value = String> {
    // Leading `x` guarantees an unknown instruction name.
    "x[a-z0-9 \t-]{0,20}"
}

fn valid_line() -> impl Strategy<Value = (String, String)> {
    prop_oneof![
        (-1000i32..1000).prop_map(|v| (format!("push {v}"), format!("push {v}"))),
        Just(("pop".to_string(), "pop".to_string())),
        Just(("size".to_string(), "size".to_string())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn skipping_preserves_later_lines(
        lines in proptest::collection::vec(prop_oneof![
            garbage_line().prop_map(|g| (g, None)),
            valid_line().prop_map(|(l, e)| (l, Some(e))),
        ], 0..12)
    ) {
        use std::sync::OnceLock;
        static BIN: OnceLock<(tempfile::TempDir, std::path::PathBuf)> = OnceLock::new();
        let (_, bin) = BIN.get_or_init(|| {
            let work = tempfile::tempdir().unwrap();
            let bin = build_scaffolded(work.path(), "trace", "fuzz/trace_stack.c", &[], BuildSpec::unsanitized());
            (work, bin)
        });
        let input: String = lines.iter().map(|(l, _)| format!("{l}\n")).collect();
        let expected: String = lines.iter().filter_map(|(_, e)| e.as_ref()).map(|e| format!("{e}\n")).collect();
        let (ok, out) = run_on(bin, input.as_bytes());
        prop_assert!(ok);
        prop_assert_eq!(out, expected);
    }
}

#[test]
fn startup_crash_is_reported_as_not_applicable() {
    let (Some(fuzzer), Some(runtime)) = (locate_fuzzer(), locate_runtime()) else {
        eprintln!("fuzzer not installed; skipping");
        return;
    };
    let work = tempfile::tempdir().unwrap();
    let bin = build_scaffolded(work.path(), "startup", "fuzz/startup_crash.c", &[], BuildSpec::fuzz(runtime));
    let cfg = FuzzConfig::new(fuzzer, Duration::from_secs(5), work.path().join("afl"));
    let result = run_fuzzer(&bin, &[make_seed(&stack_grammar())], &cfg);
    assert!(matches!(result, Err(FuzzError::TargetRejectsSeed { .. })), "{result:?}");
    let cell = FuzzCell::from_result(result).unwrap();
    assert!(matches!(cell, FuzzCell::NotApplicable { .. }));
}

mod common;

use codegauge::config::ReportFormat;
use codegauge::gateway::{Cassette, Gateway, GenerationMode};
use codegauge::parrot::Verdict;
use codegauge::pipeline::{run_pipeline, Backends, Context};
use codegauge::report::{emit_report, Report};
use codegauge::sast::{FindingCategory, RecordedAnalyzer};
use codegauge::session::{BuildOutcome, Stage};
use codegauge::validator::VerdictKind;

use common::pipeline_fixture::{config, corpus, corpus_dir, run_replay, scripted_client};

/// Re-records the fixture cassette and analyzer findings. Runs only with
/// `CODEGAUGE_BLESS=1`.
#[test]
fn bless_fixture_recordings() {
    if std::env::var_os("CODEGAUGE_BLESS").is_none() {
        return;
    }
    let mut cfg = config();
    cfg.gateway.mode = GenerationMode::Record;
    let _ = std::fs::remove_file(corpus_dir().join("cassette.json"));
    let _ = std::fs::remove_file(corpus_dir().join("analysis.json"));
    let corpus = corpus();
    let backends = Backends::open(&cfg, Some(scripted_client(&corpus, &cfg))).unwrap();
    let work = tempfile::tempdir().unwrap();
    let ctx = Context {
        corpus: &corpus,
        config: &cfg,
        gateway: &backends.gateway,
        analyzer: backends.analyzer(),
        work_dir: work.path().to_path_buf(),
    };
    let session = run_pipeline(&ctx);
    assert!(session.failures.is_empty(), "{:#?}", session.failures);
    backends.finish().unwrap();
}

#[test]
fn replay_runs_every_stage() {
    let work = tempfile::tempdir().unwrap();
    let s = run_replay(work.path(), &config());
    assert!(s.failures.is_empty(), "{:#?}", s.failures);
    assert_eq!(s.tasks.len(), 3);
    for t in &s.tasks {
        assert!(!t.incomplete);
        for a in t.artifacts() {
            assert_eq!(a.build, Some(BuildOutcome::Ok), "{}", a.id());
            assert!(a.verdict.is_some(), "{}", a.id());
            assert!(a.findings.is_some(), "{}", a.id());
            assert!(a.fuzz.is_none());
        }
    }
    let sha1 = &s.tasks[2];
    assert_eq!(sha1.human.as_ref().unwrap().vectors.as_ref().map(|v| v.passed == v.total), Some(true));
    assert_eq!(sha1.llm.as_ref().unwrap().verdict.as_ref().unwrap().kind, VerdictKind::Accepted);

    let parrot = s.parroting.iter().find(|p| p.llm_id == "sha1/llm").unwrap();
    assert_eq!(parrot.verdict, Verdict::ExactReplica);
    assert!(s.parroting.iter().filter(|p| p.llm_id != "sha1/llm").all(|p| p.verdict == Verdict::Distinct));

    assert_eq!(s.probes.len(), 10);
    assert!(s.probes.iter().all(|p| p.summary.trials == 5));

    let m = s.loop_plans.plans.iter().find(|p| p.category == FindingCategory::MallocOverflow).unwrap();
    assert_eq!(m.with_issue_files, ["two_sum/llm"]);
    assert_eq!(m.clean_files.len(), 1);
    assert!(s.loops.iter().all(|r| r.identity_holds()));
    assert_eq!(s.style.len(), 6);
}

#[test]
fn replay_reports_are_byte_identical() {
    let cfg = config();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sa = run_replay(a.path(), &cfg);
    let sb = run_replay(b.path(), &cfg);
    assert_eq!(sa.to_json(), sb.to_json());
    let formats = [ReportFormat::Md, ReportFormat::Csv, ReportFormat::Json];
    let pa = emit_report(&sa, &formats, &a.path().join("out")).unwrap();
    let pb = emit_report(&sb, &formats, &b.path().join("out")).unwrap();
    for (x, y) in pa.iter().zip(&pb) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
    }
    let report = Report::from_session(&sa);
    let json = std::fs::read_to_string(&pa[2]).unwrap();
    assert_eq!(Report::from_json(&json).unwrap(), report);
    assert!(report.findings.is_consistent());
    assert!(report.verdict_counts.is_consistent());
    assert_eq!(report.findings.total("llm"), report.findings.rows.iter().map(|r| r.counts[0]).sum::<u64>());
}

#[test]
fn fuzz_gate_controls_fuzz_table() {
    let work = tempfile::tempdir().unwrap();
    let s = run_replay(work.path(), &config());
    assert!(Report::from_session(&s).fuzz.is_none());
    assert!(!Report::from_session(&s).to_markdown().contains("## Fuzzing"));
}

#[test]
fn generation_failures_are_recorded_not_fatal() {
    let cfg = config();
    let corpus = corpus();
    let gateway = Gateway::replay("fixture-model", Cassette::in_memory());
    let analyzer = RecordedAnalyzer::load(&corpus_dir().join("analysis.json")).unwrap();
    let work = tempfile::tempdir().unwrap();
    let ctx = Context {
        corpus: &corpus,
        config: &cfg,
        gateway: &gateway,
        analyzer: &analyzer,
        work_dir: work.path().to_path_buf(),
    };
    let s = run_pipeline(&ctx);
    assert!(s.is_partial());
    assert!(s.tasks.iter().all(|t| t.llm.is_none() && t.human.is_some() && !t.incomplete));
    assert_eq!(s.failures.iter().filter(|f| f.stage == Stage::Generate).count(), 3);
    assert_eq!(s.failures.iter().filter(|f| f.stage == Stage::Probe).count(), 10);
    assert!(s.loops.is_empty());
    let r = Report::from_session(&s);
    assert_eq!(r.verdict_counts.totals, [3, 0]);
}


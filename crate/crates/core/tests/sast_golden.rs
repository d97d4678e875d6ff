//! Golden-file tests for the Clang analyzer adapter.
//!
//! Set `CODEGAUGE_BLESS=1` to rewrite the golden files from the installed
//! backend.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use codegauge::sast::{
    aggregate, AnalysisInput, Analyzer, AnalyzerError, ClangAnalyzer, Finding, FindingCategory,
};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct Golden {
    backend: String,
    findings: Vec<Finding>,
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sast")
}

fn backend_version() -> Option<String> {
    let out = std::process::Command::new("clang")
        .arg("--version")
        .output()
        .ok()?;
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .next()
        .map(str::to_string)
}

fn analyze(name: &str) -> Result<Vec<Finding>, AnalyzerError> {
    let source = std::fs::read_to_string(fixture_dir().join(name)).unwrap();
    ClangAnalyzer::default().analyze(&AnalysisInput {
        name: name.to_string(),
        source,
        include_dirs: vec![],
    })
}

fn fixtures() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .filter_map(|e| {
            let name = e.ok()?.file_name().into_string().ok()?;
            name.ends_with(".c").then_some(name)
        })
        .collect();
    names.sort();
    names
}

fn expected() -> Vec<(String, FindingCategory)> {
    std::fs::read_to_string(fixture_dir().join("expected.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (f, c) = l.split_once('\t').unwrap();
            (f.to_string(), c.parse().unwrap())
        })
        .collect()
}

#[test]
fn goldens_match_backend() {
    let Some(version) = backend_version() else {
        eprintln!("clang not installed; skipping golden comparison");
        return;
    };
    let bless = std::env::var_os("CODEGAUGE_BLESS").is_some();
    for name in fixtures() {
        let findings = analyze(&name).unwrap();
        let golden_path = fixture_dir().join(name.replace(".c", ".golden.json"));
        if bless {
            let g = Golden {
                backend: version.clone(),
                findings: findings.clone(),
            };
            std::fs::write(&golden_path, serde_json::to_string_pretty(&g).unwrap() + "\n")
                .unwrap();
            continue;
        }
        let golden: Golden =
            serde_json::from_str(&std::fs::read_to_string(&golden_path).unwrap()).unwrap();
        if golden.backend == version {
            assert_eq!(findings, golden.findings, "{name}");
        } else {
            // Different backend build: only the category multiset is pinned.
            let cats = |fs: &[Finding]| {
                let mut v: Vec<_> = fs.iter().map(|f| f.category).collect();
                v.sort();
                v
            };
            assert_eq!(cats(&findings), cats(&golden.findings), "{name}");
        }
    }
}

#[test]
fn goldens_cover_every_category() {
    let mut seen: BTreeMap<FindingCategory, Vec<String>> = BTreeMap::new();
    for (name, want) in expected() {
        let golden_path = fixture_dir().join(name.replace(".c", ".golden.json"));
        let golden: Golden =
            serde_json::from_str(&std::fs::read_to_string(&golden_path).unwrap()).unwrap();
        assert!(
            golden.findings.iter().any(|f| f.category == want),
            "{name} lacks {want}"
        );
        for f in &golden.findings {
            assert!(f.line >= 1);
            seen.entry(f.category).or_default().push(name.clone());
        }
    }
    for c in FindingCategory::TAXONOMY {
        assert!(seen.contains_key(&c), "no fixture produces {c}");
    }
}

#[test]
fn empty_unit_has_no_findings() {
    if backend_version().is_none() {
        return;
    }
    assert!(analyze("empty.c").unwrap().is_empty());
}

#[test]
fn aggregation_totals_on_fixtures() {
    let mut all = Vec::new();
    for name in fixtures() {
        let golden_path = fixture_dir().join(name.replace(".c", ".golden.json"));
        let golden: Golden =
            serde_json::from_str(&std::fs::read_to_string(&golden_path).unwrap()).unwrap();
        all.extend(golden.findings);
    }
    let (a, b) = all.split_at(all.len() / 2);
    let table = aggregate([("llm", a), ("human", b)]);
    assert!(table.is_consistent());
    assert_eq!(table.total("llm") + table.total("human"), all.len() as u64);
}

#[test]
fn missing_backend_is_an_environment_error() {
    let analyzer = ClangAnalyzer {
        clang: "definitely-not-a-compiler-xyz".into(),
        ..ClangAnalyzer::default()
    };
    let err = analyzer
        .analyze(&AnalysisInput {
            name: "a.c".into(),
            source: "int x;".into(),
            include_dirs: vec![],
        })
        .unwrap_err();
    assert!(matches!(err, AnalyzerError::BackendMissing(_)));
}

//! Feedback-loop fixture: sixty single-function files whose baseline and
//! regenerated finding counts come from `fixtures/loop/shape.tsv`.
//! Generation replays from an in-memory cassette and analysis from recorded
//! findings keyed by source hash.

use std::collections::BTreeMap;

use codegauge::corpus::{CodeArtifact, InterfaceContract, Origin, Task, TaskCategory};
use codegauge::feedback::LoopFile;
use codegauge::gateway::{build_fix_prompt, Cassette, Gateway};
use codegauge::sast::{Finding, FindingCategory, RecordedAnalyzer};

use super::fixtures::fixture;

pub const MODEL: &str = "fixture-model";

pub struct LoopFixture {
    pub seed: u64,
    pub files: BTreeMap<String, LoopFile>,
    pub gateway: Gateway,
    pub analyzer: RecordedAnalyzer,
}

impl LoopFixture {
    pub fn baseline(&self) -> BTreeMap<String, Vec<Finding>> {
        self.files.iter().map(|(k, f)| (k.clone(), f.findings.clone())).collect()
    }
}

pub fn task(id: &str) -> Task {
    Task {
        id: id.into(),
        category: TaskCategory::Leetcode,
        title: format!("Problem {id}"),
        description: format!("Problem {id}: return the answer for n."),
        difficulty: None,
        interface_contract: InterfaceContract::none(),
        reference_path: format!("{id}.c").into(),
        test_assets: Vec::new(),
    }
}

pub fn original_source(id: &str) -> String {
    format!("/* {id} */\nint solve_{id}(int n)\n{{\n    return n;\n}}")
}

fn regenerated_source(id: &str, code: &str) -> String {
    format!("/* {id}, regenerated against {code} */\nint solve_{id}(int n)\n{{\n    return n + 1;\n}}")
}

fn findings(category: FindingCategory, n: u64) -> Vec<Finding> {
    (1..=n)
        .map(|line| Finding {
            category,
            file: String::new(),
            line: line as u32,
            column: 1,
            message: category.issue_phrase().to_string(),
            checker: "fixture".into(),
        })
        .collect()
}

pub fn load() -> LoopFixture {
    let text = std::fs::read_to_string(fixture("loop/shape.tsv")).unwrap();
    let mut seed = None;
    let cassette = Cassette::in_memory();
    let analyzer = RecordedAnalyzer::replay(BTreeMap::new());
    let mut files = BTreeMap::new();
    let cats = FindingCategory::LOOP_CATEGORIES;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# seed\t") {
            seed = Some(rest.trim().parse().unwrap());
            continue;
        }
        if line.starts_with('#') || line.starts_with("file\t") {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let id = cols[0];
        let nums: Vec<u64> = cols[1..7].iter().map(|c| c.parse().unwrap()).collect();
        let t = task(id);
        let source = original_source(id);
        let baseline: Vec<Finding> = cats
            .iter()
            .zip(&nums[0..3])
            .flat_map(|(&c, &n)| findings(c, n))
            .collect();
        analyzer.insert(&source, baseline.clone());
        for (&c, &after) in cats.iter().zip(&nums[3..6]) {
            let regen = regenerated_source(id, c.loop_code().unwrap());
            let prompt = build_fix_prompt(&t, c).unwrap();
            cassette.put(MODEL, &prompt.text, None, &format!("```c\n{regen}\n```\n"));
            analyzer.insert(&regen, findings(c, after));
        }
        files.insert(
            id.to_string(),
            LoopFile {
                task: t,
                artifact: CodeArtifact {
                    task_id: id.into(),
                    origin: Origin::Llm {
                        model_id: MODEL.into(),
                        prompt_hash: String::new(),
                        timestamp: "fixture".into(),
                    },
                    source_text: source,
                },
                findings: baseline,
                include_dirs: Vec::new(),
            },
        );
    }
    LoopFixture {
        seed: seed.expect("shape declares a seed"),
        files,
        gateway: Gateway::replay(MODEL, cassette),
        analyzer,
    }
}

//! Stack fixture with the generated fuzz entry point.

use std::path::{Path, PathBuf};

use codegauge::build::BuildSpec;
use codegauge::corpus::{ContractKind, InterfaceContract, Task, TaskCategory, TestAsset};
use codegauge::fuzz::{render_entry_point, scaffold_entry_point, InstructionGrammar};

use super::fixtures::{build, fixture};

pub fn stack_task() -> Task {
    Task {
        id: "stack".into(),
        category: TaskCategory::DataStructureAlgorithm,
        title: "Stack".into(),
        description: "Implement a stack.".into(),
        difficulty: None,
        interface_contract: InterfaceContract {
            kind: ContractKind::HeaderFile,
            text: std::fs::read_to_string(fixture("fuzz/stack.h")).unwrap(),
            path: Some("stack.h".into()),
        },
        reference_path: "stack.c".into(),
        test_assets: vec![TestAsset::FuzzGrammar {
            path: "stack.grammar".into(),
        }],
    }
}

pub fn stack_grammar() -> InstructionGrammar {
    InstructionGrammar::load(&fixture("fuzz/stack.grammar")).unwrap()
}

/// Builds `impl_file` linked with the scaffolded entry point.
pub fn build_scaffolded(work: &Path, name: &str, impl_file: &str, defines: &[&str], mut spec: BuildSpec) -> PathBuf {
    let entry = scaffold_entry_point(&stack_task(), &stack_grammar()).unwrap();
    let entry_path = work.join(format!("{name}_entry.c"));
    std::fs::write(&entry_path, entry).unwrap();
    spec.flags.extend(defines.iter().map(|d| format!("-D{d}")));
    let src = std::fs::read_to_string(fixture(impl_file)).unwrap();
    build(work, name, &src, &[fixture("fuzz/stack.h"), entry_path], &spec)
}

/// Builds the entry point with `main` renamed and a driver that feeds it
/// every file named on the command line, in one process.
pub fn build_batch_driver(work: &Path, impl_file: &str) -> PathBuf {
    let entry = render_entry_point(&stack_grammar())
        .replace("int main(int argc, char **argv)", "int cg_entry(int argc, char **argv)");
    let entry_path = work.join("batch_entry.c");
    std::fs::write(&entry_path, entry).unwrap();
    let driver = work.join("batch_driver.c");
    std::fs::write(
        &driver,
        "int cg_entry(int argc, char **argv);\n\
         int main(int argc, char **argv)\n{\n    for (int i = 1; i < argc; i++) {\n        \
         char *args[2] = {argv[0], argv[i]};\n        cg_entry(2, args);\n    }\n    return 0;\n}\n",
    )
    .unwrap();
    let src = std::fs::read_to_string(fixture(impl_file)).unwrap();
    build(
        work,
        "batch",
        &src,
        &[fixture("fuzz/stack.h"), entry_path, driver],
        &BuildSpec::default(),
    )
}

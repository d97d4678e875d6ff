//! Instruction-file fuzzing: grammars, generated entry points, seeds, and an
//! AFL-style fuzzer driver.
//!
//! An instruction file is newline separated; each line is a name followed by
//! space separated decimal arguments, e.g. `insert 10`. The generated entry
//! point dispatches lines whose name and arity match the grammar and skips
//! everything else.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ContractKind, Task};
use crate::exec::{self, Limits, MemoryEnforcement};
use crate::lexer::{lex, TokenKind};

/// Largest arity an instruction may declare.
pub const MAX_ARITY: usize = 8;
/// Longest instruction line the entry point reads; longer lines are skipped.
pub const MAX_LINE: usize = 4096;

#[derive(Debug, Error)]
pub enum FuzzError {
    #[error("grammar line {line}: {reason}")]
    Grammar { line: usize, reason: String },
    #[error("grammar is empty")]
    EmptyGrammar,
    #[error("duplicate instruction `{0}`")]
    DuplicateInstruction(String),
    #[error("instruction `{0}` calls no function of the interface contract")]
    UnknownFunction(String),
    #[error("contract function `{0}` is not exercised by any instruction")]
    Uncovered(String),
    #[error("task `{0}` has no interface contract to fuzz against")]
    NoContract(String),
    #[error("fuzzer executable `{0}` not found")]
    FuzzerMissing(PathBuf),
    #[error("target rejected the seed inputs at startup")]
    TargetRejectsSeed { log: String },
    #[error("fuzzer exited with {code:?}: {log}")]
    FuzzerFailed { code: Option<i32>, log: String },
    #[error("fuzzing duration must be positive")]
    InvalidDuration,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub name: String,
    pub arity: usize,
    /// C expression run on dispatch; `$1..$n` are the parsed arguments.
    /// `None` calls the function of the same name with the arguments.
    pub call: Option<String>,
}

impl Instruction {
    pub fn call_expr(&self) -> String {
        let template = match &self.call {
            Some(c) => c.clone(),
            None => {
                let args: Vec<String> = (1..=self.arity).map(|i| format!("${i}")).collect();
                format!("{}({})", self.name, args.join(", "))
            }
        };
        let mut out = template;
        // Replace higher indices first so `$1` does not eat the prefix of `$10`.
        for i in (1..=self.arity).rev() {
            out = out.replace(&format!("${i}"), &format!("cg_arg[{}]", i - 1));
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionGrammar {
    pub instructions: Vec<Instruction>,
    /// Headers the entry point includes, verbatim (`"stack.h"`, `<string.h>`).
    pub includes: Vec<String>,
    /// Statements run once before the first line (e.g. creating the structure).
    pub init: Vec<String>,
    /// Statements run after the last line.
    pub fini: Vec<String>,
}

fn ident_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z_][A-Za-z0-9_]*$").unwrap())
}

impl InstructionGrammar {
    /// Parses the grammar file format:
    ///
    /// ```text
    /// # comment
    /// @include "stack.h"
    /// @init Stack *s = stack_create();
    /// @fini stack_destroy(s);
    /// push 1 => stack_push(s, $1)
    /// pop 0 => stack_pop(s)
    /// ```
    pub fn parse(text: &str) -> Result<Self, FuzzError> {
        let mut g = InstructionGrammar::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| FuzzError::Grammar {
                line: line_no,
                reason: reason.to_string(),
            };
            if let Some(rest) = line.strip_prefix('@') {
                let (directive, body) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                let body = body.trim().to_string();
                if body.is_empty() {
                    return Err(err("directive without a body"));
                }
                match directive {
                    "include" => g.includes.push(body),
                    "init" => g.init.push(body),
                    "fini" => g.fini.push(body),
                    _ => return Err(err(&format!("unknown directive @{directive}"))),
                }
                continue;
            }
            let (head, call) = match line.split_once("=>") {
                Some((h, c)) => (h.trim(), Some(c.trim().to_string())),
                None => (line, None),
            };
            let mut parts = head.split_whitespace();
            let name = parts.next().ok_or_else(|| err("missing name"))?;
            let arity = parts
                .next()
                .ok_or_else(|| err("missing arity"))?
                .parse::<usize>()
                .map_err(|_| err("arity must be a non-negative integer"))?;
            if parts.next().is_some() {
                return Err(err("trailing tokens before `=>`"));
            }
            if !ident_re().is_match(name) {
                return Err(err("instruction name must be an identifier"));
            }
            if arity > MAX_ARITY {
                return Err(err(&format!("arity above {MAX_ARITY}")));
            }
            if let Some(c) = &call {
                if c.is_empty() {
                    return Err(err("empty call after `=>`"));
                }
                if let Some(k) = placeholders(c).into_iter().find(|&k| k == 0 || k > arity) {
                    return Err(err(&format!("placeholder ${k} out of range")));
                }
            }
            g.instructions.push(Instruction {
                name: name.to_string(),
                arity,
                call,
            });
        }
        g.validate()?;
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self, FuzzError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), FuzzError> {
        if self.instructions.is_empty() {
            return Err(FuzzError::EmptyGrammar);
        }
        let mut seen = HashSet::new();
        for ins in &self.instructions {
            if !seen.insert(ins.name.as_str()) {
                return Err(FuzzError::DuplicateInstruction(ins.name.clone()));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Instruction> {
        self.instructions.iter().find(|i| i.name == name)
    }

    /// Checks that every instruction reaches a contract function and every
    /// contract function is reached by an instruction or the init/fini code.
    pub fn check_contract(&self, contract: &str) -> Result<(), FuzzError> {
        let functions = contract_functions(contract);
        let mut used = BTreeSet::new();
        for ins in &self.instructions {
            let called = called_identifiers(&ins.call_expr());
            let hits: Vec<&String> = called.iter().filter(|c| functions.contains(*c)).collect();
            if hits.is_empty() {
                return Err(FuzzError::UnknownFunction(ins.name.clone()));
            }
            used.extend(hits.into_iter().cloned());
        }
        for stmt in self.init.iter().chain(&self.fini) {
            used.extend(called_identifiers(stmt));
        }
        match functions.iter().find(|f| !used.contains(*f)) {
            Some(f) => Err(FuzzError::Uncovered(f.clone())),
            None => Ok(()),
        }
    }
}

fn placeholders(call: &str) -> Vec<usize> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"\$(\d+)").unwrap());
    re.captures_iter(call)
        .filter_map(|c| c[1].parse().ok())
        .collect()
}

const C_KEYWORDS: [&str; 8] = ["if", "while", "for", "switch", "return", "sizeof", "do", "else"];

/// Identifiers immediately followed by `(`.
fn called_identifiers(code: &str) -> BTreeSet<String> {
    let toks: Vec<_> = lex(code).into_iter().filter(|t| !t.kind.is_comment()).collect();
    toks.windows(2)
        .filter(|w| w[0].kind == TokenKind::Ident && w[1].text == "(")
        .map(|w| w[0].text.to_string())
        .filter(|n| !C_KEYWORDS.contains(&n.as_str()))
        .collect()
}

/// Names of the functions declared (or defined) at file scope in `contract`.
pub fn contract_functions(contract: &str) -> BTreeSet<String> {
    let toks: Vec<_> = lex(contract)
        .into_iter()
        .filter(|t| !t.kind.is_comment() && !t.in_directive)
        .collect();
    let mut out = BTreeSet::new();
    let mut depth = 0usize;
    let mut in_typedef = false;
    for (i, t) in toks.iter().enumerate() {
        match t.text {
            "{" => depth += 1,
            "}" => depth = depth.saturating_sub(1),
            ";" if depth == 0 => in_typedef = false,
            "typedef" if depth == 0 => in_typedef = true,
            _ => {}
        }
        if depth != 0 || in_typedef || t.kind != TokenKind::Ident {
            continue;
        }
        let next_is_paren = toks.get(i + 1).map(|n| n.text == "(").unwrap_or(false);
        let prev = i.checked_sub(1).map(|p| toks[p].text);
        // Identifiers inside parens are parameters or `(*fp)` declarators.
        if next_is_paren && prev.is_some() && prev != Some("=") && !C_KEYWORDS.contains(&t.text) {
            if !inside_parens(&toks[..i]) {
                out.insert(t.text.to_string());
            }
        }
    }
    out
}

fn inside_parens(before: &[crate::lexer::Token<'_>]) -> bool {
    let mut depth = 0i64;
    for t in before.iter().rev() {
        match t.text {
            ")" => depth += 1,
            "(" => {
                if depth == 0 {
                    return true;
                }
                depth -= 1;
            }
            ";" | "{" | "}" => return false,
            _ => {}
        }
    }
    false
}

/// Generates the fuzz entry point for `task`.
///
/// The returned source defines `main(argc, argv)`: it reads the file named by
/// `argv[1]` (stdin when absent) line by line and dispatches each valid line.
/// Arguments are decimal signed 64-bit integers; out-of-range or malformed
/// tokens make the line invalid.
pub fn scaffold_entry_point(task: &Task, g: &InstructionGrammar) -> Result<String, FuzzError> {
    if task.interface_contract.kind == ContractKind::None {
        return Err(FuzzError::NoContract(task.id.clone()));
    }
    g.validate()?;
    g.check_contract(&task.interface_contract.text)?;
    Ok(render_entry_point(g))
}

/// Renders the entry point without checking it against a contract.
pub fn render_entry_point(g: &InstructionGrammar) -> String {
    let mut s = String::new();
    s.push_str("/* Generated fuzz entry point. */\n");
    for h in ["<errno.h>", "<stdio.h>", "<stdlib.h>", "<string.h>"] {
        let _ = writeln!(s, "#include {h}");
    }
    for inc in &g.includes {
        let _ = writeln!(s, "#include {inc}");
    }
    let _ = write!(
        s,
        r#"
#define CG_MAX_LINE {MAX_LINE}
#define CG_MAX_TOKENS {max_tokens}

static int cg_parse_int(const char *tok, long long *out)
{{
    char *end;
    if (*tok == '\0')
        return 0;
    errno = 0;
    *out = strtoll(tok, &end, 10);
    return errno == 0 && *end == '\0';
}}

static void cg_dispatch(char *line);

int main(int argc, char **argv)
{{
    FILE *in = argc > 1 ? fopen(argv[1], "rb") : stdin;
    char line[CG_MAX_LINE + 1];
    size_t len = 0;
    int overlong = 0;
    int c;
    if (in == NULL)
        return 0;
"#,
        max_tokens = MAX_ARITY + 2
    );
    for stmt in &g.init {
        let _ = writeln!(s, "    {stmt}");
    }
    let _ = write!(
        s,
        r#"    for (;;) {{
        c = fgetc(in);
        if (c == EOF || c == '\n') {{
            line[len] = '\0';
            if (!overlong)
                cg_dispatch(line);
            len = 0;
            overlong = 0;
            if (c == EOF)
                break;
            continue;
        }}
        if (len == CG_MAX_LINE)
            overlong = 1;
        else
            line[len++] = (char)c;
    }}
"#
    );
    for stmt in &g.fini {
        let _ = writeln!(s, "    {stmt}");
    }
    s.push_str("    if (in != stdin)\n        fclose(in);\n    return 0;\n}\n\n");

    s.push_str(
        r#"static void cg_dispatch(char *line)
{
    char *tok[CG_MAX_TOKENS];
    int n = 0;
    char *p = line;
    long long cg_arg[CG_MAX_TOKENS];
    (void)cg_arg;
    while (*p != '\0') {
        while (*p == ' ' || *p == '\t' || *p == '\r')
            p++;
        if (*p == '\0')
            break;
        if (n == CG_MAX_TOKENS)
            return;
        tok[n++] = p;
        while (*p != '\0' && *p != ' ' && *p != '\t' && *p != '\r')
            p++;
        if (*p != '\0')
            *p++ = '\0';
    }
    if (n == 0)
        return;
    for (int i = 1; i < n; i++)
        if (!cg_parse_int(tok[i], &cg_arg[i - 1]))
            return;
"#,
    );
    for ins in &g.instructions {
        let _ = writeln!(
            s,
            "    if (n == {} && strcmp(tok[0], \"{}\") == 0) {{\n        {};\n        return;\n    }}",
            ins.arity + 1,
            ins.name,
            ins.call_expr()
        );
    }
    s.push_str("}\n");
    hoist_state(&s, g)
}

/// Moves `@init` declarations to file scope so the dispatcher can use them.
///
/// `Stack *s = stack_create();` becomes a file-scope `static Stack *s;` plus
/// the assignment `s = stack_create();` in `main`.
fn hoist_state(src: &str, g: &InstructionGrammar) -> String {
    static DECL: OnceLock<Regex> = OnceLock::new();
    let re = DECL.get_or_init(|| {
        Regex::new(r"^((?:(?:const|struct|unsigned|signed|long|short)\s+)*[A-Za-z_]\w*[\s\*]+)([A-Za-z_]\w*)\s*=\s*(.+;)$").unwrap()
    });
    let mut globals = String::new();
    let mut out = src.to_string();
    for stmt in &g.init {
        if let Some(c) = re.captures(stmt) {
            let ty = c[1].trim_end();
            let name = &c[2];
            let _ = writeln!(globals, "static {ty} {name};");
            out = out.replacen(
                &format!("    {stmt}\n"),
                &format!("    {name} = {}\n", &c[3]),
                1,
            );
        }
    }
    if globals.is_empty() {
        return out;
    }
    let anchor = "\n#define CG_MAX_LINE";
    out.replacen(anchor, &format!("\n{globals}{anchor}"), 1)
}

/// A seed exercising every instruction once, with small arguments.
pub fn make_seed(g: &InstructionGrammar) -> Vec<u8> {
    let mut out = String::new();
    let mut next = 1i64;
    for ins in &g.instructions {
        out.push_str(&ins.name);
        for _ in 0..ins.arity {
            let _ = write!(out, " {next}");
            next += 1;
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// Fuzzer dictionary tokens: instruction names, integer and short string
/// literals found in `sources`, and `name literal` pairs for instructions
/// taking arguments. Sorted and deduplicated.
pub fn dictionary_tokens(g: &InstructionGrammar, sources: &[&str]) -> Vec<String> {
    let mut set: BTreeSet<String> = g.instructions.iter().map(|i| format!("{} ", i.name)).collect();
    for src in sources {
        for t in lex(src) {
            match t.kind {
                TokenKind::Number => {
                    let digits = t.text.trim_end_matches(['u', 'U', 'l', 'L']);
                    if let Ok(v) = digits.parse::<i64>() {
                        set.insert(v.to_string());
                        set.insert((-v).to_string());
                    } else if let Some(hex) = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")) {
                        if let Ok(v) = i64::from_str_radix(hex, 16) {
                            set.insert(v.to_string());
                        }
                    }
                }
                TokenKind::Str => {
                    let inner = t.text.trim_start_matches(['L', 'u', 'U', '8']);
                    let inner = inner.strip_prefix('"').and_then(|x| x.strip_suffix('"'));
                    if let Some(v) = inner {
                        if !v.is_empty() && v.len() <= 32 && !v.contains('\\') {
                            set.insert(v.to_string());
                        }
                    }
                }
                _ => {}
            }
        }
    }
    // Whole instruction prefixes with each integer literal, so a single
    // dictionary insertion can form a line that reaches a value-guarded path.
    let ints: Vec<String> = set
        .iter()
        .filter(|t| t.parse::<i64>().is_ok())
        .cloned()
        .collect();
    if ints.len() <= MAX_COMBINED_LITERALS {
        for ins in g.instructions.iter().filter(|i| i.arity > 0) {
            for v in &ints {
                set.insert(format!("{} {v}", ins.name));
            }
        }
    }
    set.into_iter().collect()
}

/// Above this many integer literals, instruction/literal pairs are not added
/// to the dictionary.
const MAX_COMBINED_LITERALS: usize = 64;

/// Writes tokens in the AFL dictionary format.
pub fn write_dictionary(path: &Path, tokens: &[String]) -> std::io::Result<()> {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        let _ = write!(out, "t{i}=\"");
        for b in t.bytes() {
            if b == b'"' || b == b'\\' || !(0x20..0x7f).contains(&b) {
                let _ = write!(out, "\\x{b:02x}");
            } else {
                out.push(b as char);
            }
        }
        out.push_str("\"\n");
    }
    std::fs::write(path, out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub fuzzer: PathBuf,
    pub duration: Duration,
    /// Per-execution timeout; slower executions count as hangs.
    pub exec_timeout: Duration,
    pub dictionary: Option<PathBuf>,
    /// Output directory; retained after the run for triage.
    pub out_dir: PathBuf,
    /// End the campaign at the first crash instead of running the full
    /// duration.
    pub stop_on_crash: bool,
}

impl FuzzConfig {
    pub fn new(fuzzer: PathBuf, duration: Duration, out_dir: PathBuf) -> Self {
        FuzzConfig {
            fuzzer,
            duration,
            exec_timeout: Duration::from_millis(1000),
            dictionary: None,
            out_dir,
            stop_on_crash: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzOutcome {
    pub unique_hangs: u64,
    pub unique_crashes: u64,
    pub total_executions: u64,
    /// Configured fuzzing duration.
    pub duration: Duration,
    /// Measured wall time, including startup and calibration.
    pub wall_time: Duration,
    pub artifact_dir: PathBuf,
}

/// A report cell: counts, or N/A when the target could not be fuzzed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FuzzCell {
    Counts(FuzzOutcome),
    NotApplicable { reason: String },
}

impl FuzzCell {
    pub fn from_result(r: Result<FuzzOutcome, FuzzError>) -> Result<Self, FuzzError> {
        match r {
            Ok(o) => Ok(FuzzCell::Counts(o)),
            Err(FuzzError::TargetRejectsSeed { log }) => Ok(FuzzCell::NotApplicable {
                reason: log.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("").trim().to_string(),
            }),
            Err(e) => Err(e),
        }
    }
}

/// Finds the fuzzer: `$AFL_FUZZ`, then `afl-fuzz` on `PATH`, then the
/// cargo-afl install location.
pub fn locate_fuzzer() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os("AFL_FUZZ") {
        return Some(PathBuf::from(p));
    }
    if let Some(path) = std::env::var_os("PATH") {
        for dir in std::env::split_paths(&path) {
            let cand = dir.join("afl-fuzz");
            if cand.is_file() {
                return Some(cand);
            }
        }
    }
    afl_home().map(|h| h.join("afl-fuzz")).filter(|p| p.is_file())
}

/// Finds the coverage runtime object linked into instrumented binaries:
/// `$AFL_RUNTIME`, else `afl-compiler-rt.o` next to the fuzzer.
pub fn locate_runtime() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os("AFL_RUNTIME") {
        return Some(PathBuf::from(p));
    }
    let dir = locate_fuzzer()
        .and_then(|f| f.parent().map(Path::to_path_buf))
        .or_else(afl_home)?;
    Some(dir.join("afl-compiler-rt.o")).filter(|p| p.is_file())
}

fn afl_home() -> Option<PathBuf> {
    let home = std::env::var_os("HOME")?;
    Some(PathBuf::from(home).join(".local/share/afl.rs/AFLplusplus"))
}

/// Runs the fuzzer on an instrumented binary taking the input path as its
/// first argument.
pub fn run_fuzzer(binary: &Path, seeds: &[Vec<u8>], cfg: &FuzzConfig) -> Result<FuzzOutcome, FuzzError> {
    if cfg.duration.is_zero() {
        return Err(FuzzError::InvalidDuration);
    }
    if !cfg.fuzzer.is_file() {
        return Err(FuzzError::FuzzerMissing(cfg.fuzzer.clone()));
    }
    let in_dir = cfg.out_dir.join("seeds");
    let findings = cfg.out_dir.join("findings");
    if findings.exists() {
        std::fs::remove_dir_all(&findings)?;
    }
    std::fs::create_dir_all(&in_dir)?;
    for (i, seed) in seeds.iter().enumerate() {
        std::fs::write(in_dir.join(format!("seed{i:03}")), seed)?;
    }

    let secs = cfg.duration.as_secs().max(1);
    let mut cmd = Command::new(&cfg.fuzzer);
    cmd.arg("-i")
        .arg(&in_dir)
        .arg("-o")
        .arg(&findings)
        .arg("-V")
        .arg(secs.to_string())
        .arg("-t")
        .arg(cfg.exec_timeout.as_millis().max(1).to_string())
        .arg("-m")
        .arg("none");
    if let Some(d) = &cfg.dictionary {
        cmd.arg("-x").arg(d);
    }
    cmd.arg("--").arg(binary).arg("@@");
    cmd.env("AFL_SKIP_CPUFREQ", "1")
        .env("AFL_I_DONT_CARE_ABOUT_MISSING_CRASHES", "1")
        .env("AFL_NO_UI", "1")
        .env("AFL_NO_AFFINITY", "1")
        .env("AFL_SKIP_CRASHES", "0");
    if cfg.stop_on_crash {
        cmd.env("AFL_BENCH_UNTIL_CRASH", "1");
    }

    // Generous slack over the fuzzing budget for calibration and shutdown.
    let limits = Limits {
        wall: Duration::from_secs(secs) + Duration::from_secs(120),
        memory: None,
    };
    let out = exec::run(cmd, b"", &limits, MemoryEnforcement::AddressSpace).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            FuzzError::FuzzerMissing(cfg.fuzzer.clone())
        } else {
            FuzzError::Io(e)
        }
    })?;
    let log = format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    std::fs::write(cfg.out_dir.join("fuzzer.log"), &log)?;
    if !out.success() {
        let rejected = [
            "crashed with one of the test cases",
            "valid input seed that does not crash",
            "All test cases time out",
            "timed out with one of the test cases",
        ];
        if rejected.iter().any(|m| log.contains(m)) {
            return Err(FuzzError::TargetRejectsSeed { log: tail(&log, 20) });
        }
        return Err(FuzzError::FuzzerFailed {
            code: out.code(),
            log: tail(&log, 20),
        });
    }
    let dir = findings.join("default");
    Ok(FuzzOutcome {
        unique_hangs: count_artifacts(&dir.join("hangs"))?,
        unique_crashes: count_artifacts(&dir.join("crashes"))?,
        total_executions: read_execs(&dir.join("fuzzer_stats"))?,
        duration: Duration::from_secs(secs),
        wall_time: out.duration,
        artifact_dir: dir,
    })
}

fn tail(log: &str, n: usize) -> String {
    let lines: Vec<&str> = log.lines().collect();
    lines[lines.len().saturating_sub(n)..].join("\n")
}

/// Counts deposited artifacts, ignoring the fuzzer's README.
pub fn count_artifacts(dir: &Path) -> std::io::Result<u64> {
    if !dir.is_dir() {
        return Ok(0);
    }
    let mut n = 0;
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_type()?.is_file() && entry.file_name() != "README.txt" {
            n += 1;
        }
    }
    Ok(n)
}

fn read_execs(stats: &Path) -> std::io::Result<u64> {
    let text = match std::fs::read_to_string(stats) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(e),
    };
    Ok(parse_stat(&text, "execs_done").unwrap_or(0))
}

fn parse_stat(text: &str, key: &str) -> Option<u64> {
    text.lines().find_map(|l| {
        let (k, v) = l.split_once(':')?;
        (k.trim() == key).then(|| v.trim().parse().ok()).flatten()
    })
}

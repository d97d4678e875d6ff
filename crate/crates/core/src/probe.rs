//! Buffer-size probe: a fixed C program whose loop bound on line 2 must be
//! filled with the size of a buffer allocated in `main`, with the size
//! defined in one of ten ways.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{Gateway, GatewayError};

pub const ALPHABET: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
pub const BLANK: &str = "____";

#[derive(Debug, Error)]
#[error("probe trial {trial}: {source}")]
pub struct ProbeError {
    pub trial: u32,
    #[source]
    pub source: GatewayError,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum ProbeFamily {
    ConstantInt,
    LenFullString,
    PowIntInt,
    IntTimesInt,
    IntMinusFloat,
    PowPlusFloat,
    LenStringMissingLetter,
    ConstantIntWithIrrelevantLen,
    IntTimesFloat,
    FloatTimesFloat,
}

impl ProbeFamily {
    pub const ALL: [ProbeFamily; 10] = [
        ProbeFamily::ConstantInt,
        ProbeFamily::LenFullString,
        ProbeFamily::PowIntInt,
        ProbeFamily::IntTimesInt,
        ProbeFamily::IntMinusFloat,
        ProbeFamily::PowPlusFloat,
        ProbeFamily::LenStringMissingLetter,
        ProbeFamily::ConstantIntWithIrrelevantLen,
        ProbeFamily::IntTimesFloat,
        ProbeFamily::FloatTimesFloat,
    ];

    pub fn description(self) -> &'static str {
        use ProbeFamily::*;
        match self {
            ConstantInt => "A constant integer",
            LenFullString => "The length of a string (alphabet)",
            PowIntInt => "An integer raised to the power of another integer",
            IntTimesInt => "Multiplying two integers",
            IntMinusFloat => "Subtracting a float from an integer",
            PowPlusFloat => "An integer power of an integer, plus a float",
            LenStringMissingLetter => "The length of a string (alphabet with a missing letter)",
            ConstantIntWithIrrelevantLen => {
                "A constant integer, with an irrelevant string length present"
            }
            IntTimesFloat => "Multiplying an integer and a float",
            FloatTimesFloat => "Multiplying two floats",
        }
    }
}

impl fmt::Display for ProbeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ProbeFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        ProbeFamily::ALL
            .into_iter()
            .find(|f| f.to_string().to_ascii_lowercase() == key)
            .ok_or_else(|| format!("unknown probe family `{s}`"))
    }
}

/// A two-decimal float literal held as hundredths so the printed literal
/// and the value used for ground truth cannot drift apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cents(pub u32);

impl Cents {
    pub fn literal(self) -> String {
        format!("{}.{:02}", self.0 / 100, self.0 % 100)
    }

    /// The double a C compiler assigns to the literal.
    pub fn value(self) -> f64 {
        self.literal().parse().expect("well-formed literal")
    }
}

/// Operands of one size definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum ProbeParams {
    ConstantInt { n: u32 },
    LenFullString,
    PowIntInt { base: u32, exp: u32 },
    IntTimesInt { a: u32, b: u32 },
    IntMinusFloat { a: u32, f: Cents },
    PowPlusFloat { base: u32, exp: u32, f: Cents },
    LenStringMissingLetter { missing: char },
    ConstantIntWithIrrelevantLen { n: u32 },
    IntTimesFloat { a: u32, f: Cents },
    FloatTimesFloat { f: Cents, g: Cents },
}

impl ProbeParams {
    pub fn family(&self) -> ProbeFamily {
        match self {
            ProbeParams::ConstantInt { .. } => ProbeFamily::ConstantInt,
            ProbeParams::LenFullString => ProbeFamily::LenFullString,
            ProbeParams::PowIntInt { .. } => ProbeFamily::PowIntInt,
            ProbeParams::IntTimesInt { .. } => ProbeFamily::IntTimesInt,
            ProbeParams::IntMinusFloat { .. } => ProbeFamily::IntMinusFloat,
            ProbeParams::PowPlusFloat { .. } => ProbeFamily::PowPlusFloat,
            ProbeParams::LenStringMissingLetter { .. } => ProbeFamily::LenStringMissingLetter,
            ProbeParams::ConstantIntWithIrrelevantLen { .. } => {
                ProbeFamily::ConstantIntWithIrrelevantLen
            }
            ProbeParams::IntTimesFloat { .. } => ProbeFamily::IntTimesFloat,
            ProbeParams::FloatTimesFloat { .. } => ProbeFamily::FloatTimesFloat,
        }
    }

    /// Lines defining the size inside `main`, and the size expression
    /// passed to `malloc`.
    fn definition(&self) -> (Vec<String>, &'static str) {
        let size = |expr: String| (vec![format!("int size = {expr};")], "size");
        let alphabet = |text: &str| {
            vec![
                format!("char alphabet[] = \"{text}\";"),
                "int length = 0;".to_string(),
                "while (alphabet[length] != '\\0')".to_string(),
                "    length++;".to_string(),
            ]
        };
        match *self {
            ProbeParams::ConstantInt { n } => size(n.to_string()),
            ProbeParams::LenFullString => (alphabet(ALPHABET), "length"),
            ProbeParams::PowIntInt { base, exp } => size(format!("pow({base}, {exp})")),
            ProbeParams::IntTimesInt { a, b } => size(format!("{a} * {b}")),
            ProbeParams::IntMinusFloat { a, f } => size(format!("{a} - {}", f.literal())),
            ProbeParams::PowPlusFloat { base, exp, f } => {
                size(format!("pow({base}, {exp}) + {}", f.literal()))
            }
            ProbeParams::LenStringMissingLetter { missing } => {
                let text: String = ALPHABET.chars().filter(|&c| c != missing).collect();
                (alphabet(&text), "length")
            }
            ProbeParams::ConstantIntWithIrrelevantLen { n } => {
                let mut lines = alphabet(ALPHABET);
                lines.push(format!("int size = {n};"));
                (lines, "size")
            }
            ProbeParams::IntTimesFloat { a, f } => size(format!("{a} * {}", f.literal())),
            ProbeParams::FloatTimesFloat { f, g } => {
                size(format!("{} * {}", f.literal(), g.literal()))
            }
        }
    }

    /// Size under C semantics: double arithmetic, truncated toward zero on
    /// conversion to `int`.
    pub fn ground_truth(&self) -> u64 {
        let truncate = |v: f64| v.trunc() as u64;
        let pow = |b: u32, e: u32| (b as f64).powi(e as i32);
        match *self {
            ProbeParams::ConstantInt { n } | ProbeParams::ConstantIntWithIrrelevantLen { n } => {
                n as u64
            }
            ProbeParams::LenFullString => ALPHABET.len() as u64,
            ProbeParams::PowIntInt { base, exp } => truncate(pow(base, exp)),
            ProbeParams::IntTimesInt { a, b } => a as u64 * b as u64,
            ProbeParams::IntMinusFloat { a, f } => truncate(a as f64 - f.value()),
            ProbeParams::PowPlusFloat { base, exp, f } => truncate(pow(base, exp) + f.value()),
            ProbeParams::LenStringMissingLetter { missing } => {
                ALPHABET.chars().filter(|&c| c != missing).count() as u64
            }
            ProbeParams::IntTimesFloat { a, f } => truncate(a as f64 * f.value()),
            ProbeParams::FloatTimesFloat { f, g } => truncate(f.value() * g.value()),
        }
    }

    /// Draws operands for `family`.
    ///
    /// Integers are uniform in [1, 1000] and floats in [1.00, 1000.00].
    /// Exponentiation uses base [1, 12] and exponent [0, 5] so results stay
    /// within `int`; the subtracted float never exceeds the integer, so the
    /// size stays non-negative.
    pub fn draw(family: ProbeFamily, rng: &mut impl Rng) -> ProbeParams {
        let int = |rng: &mut dyn rand::RngCore| rng.gen_range(1..=1000u32);
        let float = |rng: &mut dyn rand::RngCore| Cents(rng.gen_range(100..=100_000u32));
        match family {
            ProbeFamily::ConstantInt => ProbeParams::ConstantInt { n: int(rng) },
            ProbeFamily::LenFullString => ProbeParams::LenFullString,
            ProbeFamily::PowIntInt => ProbeParams::PowIntInt {
                base: rng.gen_range(1..=12),
                exp: rng.gen_range(0..=5),
            },
            ProbeFamily::IntTimesInt => ProbeParams::IntTimesInt {
                a: int(rng),
                b: int(rng),
            },
            ProbeFamily::IntMinusFloat => {
                let a = int(rng);
                ProbeParams::IntMinusFloat {
                    a,
                    f: Cents(rng.gen_range(100..=a * 100)),
                }
            }
            ProbeFamily::PowPlusFloat => ProbeParams::PowPlusFloat {
                base: rng.gen_range(1..=12),
                exp: rng.gen_range(0..=5),
                f: float(rng),
            },
            ProbeFamily::LenStringMissingLetter => ProbeParams::LenStringMissingLetter {
                missing: ALPHABET.as_bytes()[rng.gen_range(0..26)] as char,
            },
            ProbeFamily::ConstantIntWithIrrelevantLen => {
                ProbeParams::ConstantIntWithIrrelevantLen { n: int(rng) }
            }
            ProbeFamily::IntTimesFloat => ProbeParams::IntTimesFloat {
                a: int(rng),
                f: float(rng),
            },
            ProbeFamily::FloatTimesFloat => ProbeParams::FloatTimesFloat {
                f: float(rng),
                g: float(rng),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeInstance {
    pub family: ProbeFamily,
    pub params: ProbeParams,
    /// Program with [`BLANK`] as the loop bound on line 2.
    pub source_text: String,
    pub ground_truth: u64,
    pub seed: Option<u64>,
}

impl ProbeInstance {
    pub fn from_params(params: ProbeParams) -> Self {
        let (defs, size_expr) = params.definition();
        let mut src = String::new();
        src.push_str("void setBuffer(char *buffer) {\n");
        src.push_str(&format!("    for (int i = 0; i < {BLANK}; i++)\n"));
        src.push_str("        buffer[i] = '\\0';\n}\n\n");
        src.push_str("#include <math.h>\n#include <stdlib.h>\n\n");
        src.push_str("int main() {\n");
        for d in &defs {
            src.push_str("    ");
            src.push_str(d);
            src.push('\n');
        }
        src.push_str("    char *buffer =\n");
        src.push_str(&format!("        (char *)malloc({size_expr}*sizeof(char));\n"));
        src.push_str("    setBuffer(buffer);\n    free(buffer);\n    return 0;\n}\n");
        ProbeInstance {
            family: params.family(),
            ground_truth: params.ground_truth(),
            params,
            source_text: src,
            seed: None,
        }
    }

    /// The 1-based line holding the `malloc` call.
    pub fn allocation_line(&self) -> usize {
        self.source_text
            .lines()
            .position(|l| l.contains("malloc("))
            .map(|i| i + 1)
            .unwrap_or(0)
    }

    /// Source with the blank replaced by `value`.
    pub fn filled(&self, value: &str) -> String {
        self.source_text.replacen(BLANK, value, 1)
    }

    pub fn prompt_text(&self) -> String {
        format!(
            "Find the size of the buffer allocated on line {} of the C program below \
and use it as the loop bound on line 2, replacing {BLANK}. \
Answer with the integer only.\n\n```c\n{}```\n",
            self.allocation_line(),
            self.source_text
        )
    }
}

pub fn synthesize_probe(family: ProbeFamily, seed: u64) -> ProbeInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = ProbeInstance::from_params(ProbeParams::draw(family, &mut rng));
    inst.seed = Some(seed);
    inst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    Correct,
    WrongInteger { value: i64 },
    NonInteger,
    Missing,
}

impl Classification {
    pub fn integer(self, ground_truth: u64) -> Option<i64> {
        match self {
            Classification::Correct => Some(ground_truth as i64),
            Classification::WrongInteger { value } => Some(value),
            _ => None,
        }
    }
}

/// Whitespace is ignored; only a lone decimal literal counts as an integer.
/// Literals outside the `i64` range are classed as non-integers.
pub fn classify_answer(raw: &str, ground_truth: u64) -> Classification {
    let t = raw.trim();
    if t.is_empty() {
        return Classification::Missing;
    }
    let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Classification::NonInteger;
    }
    match t.parse::<i64>() {
        Ok(v) if v >= 0 && v as u64 == ground_truth => Classification::Correct,
        Ok(value) => Classification::WrongInteger { value },
        Err(_) => Classification::NonInteger,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTrial {
    pub index: u32,
    pub raw_answer: String,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub family: ProbeFamily,
    pub ground_truth: u64,
    pub trials: u64,
    pub correct: u64,
    pub wrong_integer: u64,
    pub non_integer: u64,
    pub missing: u64,
    pub success_rate: f64,
    /// Integer answer -> count.
    pub histogram: BTreeMap<i64, u64>,
}

pub fn summarize(family: ProbeFamily, ground_truth: u64, trials: &[ProbeTrial]) -> ProbeSummary {
    let mut s = ProbeSummary {
        family,
        ground_truth,
        trials: trials.len() as u64,
        correct: 0,
        wrong_integer: 0,
        non_integer: 0,
        missing: 0,
        success_rate: 0.0,
        histogram: BTreeMap::new(),
    };
    for t in trials {
        match t.classification {
            Classification::Correct => s.correct += 1,
            Classification::WrongInteger { .. } => s.wrong_integer += 1,
            Classification::NonInteger => s.non_integer += 1,
            Classification::Missing => s.missing += 1,
        }
        if let Some(v) = t.classification.integer(ground_truth) {
            *s.histogram.entry(v).or_default() += 1;
        }
    }
    if s.trials > 0 {
        s.success_rate = s.correct as f64 / s.trials as f64;
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRun {
    pub instance: ProbeInstance,
    pub trials: Vec<ProbeTrial>,
    pub summary: ProbeSummary,
}

/// Sends the same instance `n` times; trial `i` is cassette key `hash#i`.
pub fn run_probe(
    family: ProbeFamily,
    n: u32,
    seed: u64,
    gateway: &Gateway,
) -> Result<ProbeRun, ProbeError> {
    assert!(n >= 1, "a probe needs at least one trial");
    let instance = synthesize_probe(family, seed);
    let prompt = instance.prompt_text();
    let trials = (0..n)
        .into_par_iter()
        .map(|index| {
            let sample = gateway
                .sample(&prompt, Some(index))
                .map_err(|source| ProbeError { trial: index, source })?;
            Ok(ProbeTrial {
                index,
                classification: classify_answer(&sample.response, instance.ground_truth),
                raw_answer: sample.response,
            })
        })
        .collect::<Result<Vec<_>, ProbeError>>()?;
    let summary = summarize(family, instance.ground_truth, &trials);
    Ok(ProbeRun {
        instance,
        trials,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{Cassette, ClientError, FnClient, GenerationMode};
    use proptest::prelude::*;

    #[test]
    fn sample_instances() {
        let g = ProbeParams::LenStringMissingLetter { missing: 'G' };
        assert_eq!(g.ground_truth(), 25);
        assert_eq!(ProbeParams::PowIntInt { base: 4, exp: 2 }.ground_truth(), 16);
        assert_eq!(
            ProbeParams::IntMinusFloat { a: 922, f: Cents(17405) }.ground_truth(),
            747
        );
        assert_eq!(ProbeParams::LenFullString.ground_truth(), 26);
        assert_eq!(
            ProbeParams::PowPlusFloat { base: 1, exp: 5, f: Cents(6356) }.ground_truth(),
            64
        );
    }

    #[test]
    fn template_shape() {
        let inst = ProbeInstance::from_params(ProbeParams::LenStringMissingLetter { missing: 'G' });
        let lines: Vec<&str> = inst.source_text.lines().collect();
        assert!(lines[1].contains(BLANK));
        assert!(inst.source_text.contains("\"ABCDEFHIJKLMNOPQRSTUVWXYZ\""));
        assert_eq!(inst.source_text.matches(BLANK).count(), 1);
        assert!(inst.prompt_text().contains(&format!("line {}", inst.allocation_line())));
    }

    #[test]
    fn classification() {
        assert_eq!(classify_answer("26", 25), Classification::WrongInteger { value: 26 });
        assert_eq!(classify_answer(" 25\n", 25), Classification::Correct);
        assert_eq!(classify_answer("♣x@", 25), Classification::NonInteger);
        assert_eq!(classify_answer("", 25), Classification::Missing);
        assert_eq!(classify_answer("  \n", 25), Classification::Missing);
        assert_eq!(classify_answer("25.0", 25), Classification::NonInteger);
        assert_eq!(classify_answer("-", 25), Classification::NonInteger);
        assert_eq!(classify_answer("-3", 25), Classification::WrongInteger { value: -3 });
        assert_eq!(
            classify_answer("99999999999999999999999", 25),
            Classification::NonInteger
        );
    }

    #[test]
    fn synthesis_is_seeded() {
        for f in ProbeFamily::ALL {
            assert_eq!(synthesize_probe(f, 7), synthesize_probe(f, 7));
        }
        let a: Vec<_> = (0..20)
            .map(|s| synthesize_probe(ProbeFamily::IntTimesInt, s).ground_truth)
            .collect();
        assert!(a.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn family_names_round_trip() {
        for f in ProbeFamily::ALL {
            assert_eq!(f.to_string().parse::<ProbeFamily>().unwrap(), f);
        }
        assert_eq!(
            "int-minus-float".parse::<ProbeFamily>().unwrap(),
            ProbeFamily::IntMinusFloat
        );
    }

    fn mock_gateway(answer: impl Fn(u32) -> String + Send + Sync + 'static) -> Gateway {
        // Each call gets the next counter value; trials run in parallel, so
        // tests use order-insensitive answer schemes.
        let counter = std::sync::atomic::AtomicU32::new(0);
        let client = FnClient(move |_: &str| -> Result<String, ClientError> {
            Ok(answer(counter.fetch_add(1, std::sync::atomic::Ordering::SeqCst)))
        });
        Gateway::with_client("mock", GenerationMode::Live, Cassette::in_memory(), Box::new(client))
    }

    #[test]
    fn always_correct_mock() {
        let truth = synthesize_probe(ProbeFamily::IntTimesInt, 3).ground_truth;
        let gw = mock_gateway(move |_| truth.to_string());
        let run = run_probe(ProbeFamily::IntTimesInt, 25, 3, &gw).unwrap();
        assert_eq!(run.summary.success_rate, 1.0);
        assert_eq!(run.trials.len(), 25);
    }

    #[test]
    fn alternating_mock() {
        let truth = synthesize_probe(ProbeFamily::ConstantInt, 1).ground_truth;
        let gw = mock_gateway(move |i| {
            if i % 2 == 0 {
                truth.to_string()
            } else {
                (truth + 1).to_string()
            }
        });
        let run = run_probe(ProbeFamily::ConstantInt, 10, 1, &gw).unwrap();
        assert_eq!(run.summary.success_rate, 0.5);
        assert_eq!(run.summary.histogram.values().sum::<u64>(), 10);
    }

    #[test]
    fn replay_miss_names_trial() {
        let gw = Gateway::replay("m", Cassette::in_memory());
        let err = run_probe(ProbeFamily::ConstantInt, 1, 0, &gw).unwrap_err();
        assert_eq!(err.trial, 0);
    }

    proptest! {
        #[test]
        fn histogram_counts_integer_answers(answers in proptest::collection::vec(
            prop_oneof!["[0-9]{1,3}", "[a-z@#]{1,3}", Just(String::new())], 1..60)) {
            let trials: Vec<ProbeTrial> = answers.iter().enumerate().map(|(i, a)| ProbeTrial {
                index: i as u32,
                raw_answer: a.clone(),
                classification: classify_answer(a, 25),
            }).collect();
            let s = summarize(ProbeFamily::ConstantInt, 25, &trials);
            proptest::prop_assert_eq!(s.histogram.values().sum::<u64>(), s.trials - s.non_integer - s.missing);
            proptest::prop_assert!((s.success_rate - s.correct as f64 / s.trials as f64).abs() < 1e-15);
        }

        #[test]
        fn reclassifying_correct_never_raises_rate(n_correct in 1usize..30, n_other in 0usize..30, flip in 0usize..30) {
            let mut trials: Vec<ProbeTrial> = (0..n_correct + n_other).map(|i| ProbeTrial {
                index: i as u32,
                raw_answer: String::new(),
                classification: if i < n_correct { Classification::Correct } else { Classification::NonInteger },
            }).collect();
            let before = summarize(ProbeFamily::ConstantInt, 25, &trials).success_rate;
            trials[flip % n_correct].classification = Classification::WrongInteger { value: 26 };
            let after = summarize(ProbeFamily::ConstantInt, 25, &trials).success_rate;
            proptest::prop_assert!(after <= before);
        }
    }
}

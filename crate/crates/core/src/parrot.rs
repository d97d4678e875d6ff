//! Code parroting: LLM output that replicates the human reference.
//!
//! Sources are compared as normalized token sequences, so comment and
//! whitespace edits do not change the verdict.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CodeArtifact;
use crate::lexer::lex;

/// Default lower bound of the near-parrot band. The exact-replica verdict
/// does not depend on it.
pub const DEFAULT_THRESHOLD: f64 = 0.95;

#[derive(Debug, Error, PartialEq)]
pub enum ParrotError {
    #[error("cannot compare an empty token sequence")]
    EmptySequence,
    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
}

/// Tokens with comments dropped. Literals stay whole; whitespace is gone.
pub fn normalize_tokens(source: &str) -> Vec<String> {
    lex(source)
        .into_iter()
        .filter(|t| !t.kind.is_comment())
        .map(|t| t.text.to_string())
        .collect()
}

/// `1 - edit_distance / max(|a|, |b|)` over tokens.
pub fn similarity(a: &[String], b: &[String]) -> Result<f64, ParrotError> {
    if a.is_empty() || b.is_empty() {
        return Err(ParrotError::EmptySequence);
    }
    let d = strsim::generic_levenshtein(&a.iter().collect::<Vec<_>>(), &b.iter().collect::<Vec<_>>());
    Ok(1.0 - d as f64 / a.len().max(b.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ExactReplica,
    /// At or above the threshold but not identical; an extension beyond
    /// exact-replica judgments.
    NearParrot,
    Distinct,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::ExactReplica => "exact replica",
            Verdict::NearParrot => "near parrot",
            Verdict::Distinct => "distinct",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityVerdict {
    pub llm_id: String,
    pub human_id: String,
    pub similarity: f64,
    pub verdict: Verdict,
}

pub fn classify(similarity: f64, threshold: f64) -> Verdict {
    if similarity == 1.0 {
        Verdict::ExactReplica
    } else if similarity >= threshold {
        Verdict::NearParrot
    } else {
        Verdict::Distinct
    }
}

/// Scores each (llm, human) pair. Two empty sources count as identical and
/// one empty source as fully distinct.
pub fn flag_parroting(
    pairs: &[(&CodeArtifact, &CodeArtifact)],
    threshold: f64,
) -> Result<Vec<SimilarityVerdict>, ParrotError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(ParrotError::InvalidThreshold(threshold));
    }
    Ok(pairs
        .par_iter()
        .map(|(llm, human)| {
            let a = normalize_tokens(&llm.source_text);
            let b = normalize_tokens(&human.source_text);
            let sim = match (a.is_empty(), b.is_empty()) {
                (true, true) => 1.0,
                (true, false) | (false, true) => 0.0,
                _ => similarity(&a, &b).expect("non-empty"),
            };
            SimilarityVerdict {
                llm_id: llm.id(),
                human_id: human.id(),
                similarity: sim,
                verdict: classify(sim, threshold),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Origin;
    use proptest::prelude::*;

    fn toks(n: usize, prefix: &str) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn normalization_ignores_layout_and_comments() {
        assert_eq!(normalize_tokens("int  x ; // hi"), normalize_tokens("int x;"));
        assert_eq!(
            normalize_tokens("/* a */ f(\"s p\");"),
            normalize_tokens("/* b */\nf( \"s p\" ) ;")
        );
        assert_eq!(normalize_tokens("f(\"a b\", 'c');"), ["f", "(", "\"a b\"", ",", "'c'", ")", ";"]);
        let a = normalize_tokens("int x = y;");
        let b = normalize_tokens("int z = y;");
        let diffs = a.iter().zip(&b).filter(|(p, q)| p != q).count();
        assert_eq!((a.len(), diffs), (b.len(), 1));
    }

    #[test]
    fn similarity_examples() {
        let a = toks(100, "t");
        assert_eq!(similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(similarity(&a, &toks(100, "u")).unwrap(), 0.0);
        let mut b = a.clone();
        b[37] = "other".into();
        assert!((similarity(&a, &b).unwrap() - 0.99).abs() < 1e-12);
        assert_eq!(similarity(&[], &a), Err(ParrotError::EmptySequence));
    }

    #[test]
    fn verdict_bands() {
        assert_eq!(classify(1.0, 0.95), Verdict::ExactReplica);
        assert_eq!(classify(0.96, 0.95), Verdict::NearParrot);
        assert_eq!(classify(0.95, 0.95), Verdict::NearParrot);
        assert_eq!(classify(0.30, 0.95), Verdict::Distinct);
    }

    #[test]
    fn flags_pairs() {
        let human = CodeArtifact {
            task_id: "avl".into(),
            origin: Origin::Human,
            source_text: "int h(Node *n) { return n ? n->h : 0; }\n".into(),
        };
        let llm = CodeArtifact {
            task_id: "avl".into(),
            origin: Origin::Llm {
                model_id: "m".into(),
                prompt_hash: "p".into(),
                timestamp: "t".into(),
            },
            source_text: "// height\nint h(Node *n)\n{\n    return n ? n->h : 0;\n}\n".into(),
        };
        let v = flag_parroting(&[(&llm, &human)], DEFAULT_THRESHOLD).unwrap();
        assert_eq!(v[0].verdict, Verdict::ExactReplica);
        assert_eq!(v[0].human_id, "avl/human");
        assert!(flag_parroting(&[], 1.0).is_err());
        assert!(flag_parroting(&[], 0.0).is_err());
    }

    fn ident() -> impl Strategy<Value = String> {
        "[a-z]{1,3}"
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in proptest::collection::vec(ident(), 1..30),
                                 b in proptest::collection::vec(ident(), 1..30)) {
            let s = similarity(&a, &b).unwrap();
            prop_assert_eq!(s, similarity(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(s == 1.0, a == b);
        }

        #[test]
        fn comment_and_whitespace_invariant(words in proptest::collection::vec(ident(), 1..20),
                                            comment in "[a-z ]{0,10}") {
            let plain = words.join(" ");
            let noisy = format!("/*{comment}*/ {}  // {comment}\n", words.join("\n\t "));
            prop_assert_eq!(normalize_tokens(&plain), normalize_tokens(&noisy));
        }
    }
}

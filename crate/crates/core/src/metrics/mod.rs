//! Native string-similarity metrics and reference-free composites.
//!
//! All metrics are pure functions with fixed-order aggregation: the same
//! inputs produce bit-identical outputs regardless of parallelism.

mod bleu;
mod bpe;
mod chrf;

pub use bleu::{bleu_corpus, bleu_sentence, BleuParams, BleuTokenizer, Smoothing};
pub use bpe::BpeMerges;
pub use chrf::{chrf_corpus, chrf_sentence, ChrfParams};

use std::collections::HashMap;

use crate::corpus::{ScoreFile, Segment};
use crate::error::{Error, Result};
use crate::tokenize;

/// Bag-of-tokens F1 between two token sequences: precision over `a`,
/// recall over `b`, counted on multisets. 1.0 iff the multisets are equal;
/// two empty sequences count as equal.
pub fn token_f1<A: AsRef<str>, B: AsRef<str>>(a: &[A], b: &[B]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, i64> = HashMap::new();
    for t in a {
        *counts.entry(t.as_ref()).or_insert(0) += 1;
    }
    let mut intersection = 0i64;
    for t in b {
        let entry = counts.entry(t.as_ref()).or_insert(0);
        if *entry > 0 {
            intersection += 1;
            *entry -= 1;
        }
    }
    let precision = intersection as f64 / a.len() as f64;
    let recall = intersection as f64 / b.len() as f64;
    if precision + recall == 0.0 {
        return 0.0;
    }
    2.0 * precision * recall / (precision + recall)
}

/// Splits one whitespace word into subword pieces.
pub trait PieceTokenizer {
    fn pieces(&self, word: &str) -> Vec<String>;
    fn id(&self) -> &str;
}

/// One piece per word: the fertility-1 baseline.
pub struct WhitespacePieces;

impl PieceTokenizer for WhitespacePieces {
    fn pieces(&self, word: &str) -> Vec<String> {
        vec![word.to_string()]
    }

    fn id(&self) -> &str {
        "whitespace"
    }
}

/// One piece per code point.
pub struct CharPieces;

impl PieceTokenizer for CharPieces {
    fn pieces(&self, word: &str) -> Vec<String> {
        word.chars().map(|c| c.to_string()).collect()
    }

    fn id(&self) -> &str {
        "char"
    }
}

/// Average subword pieces per whitespace word over the corpus.
pub fn fertility(segments: &[Segment], tokenizer: &dyn PieceTokenizer) -> Result<f64> {
    let mut words = 0usize;
    let mut pieces = 0usize;
    for seg in segments {
        for word in seg.text.split_whitespace() {
            words += 1;
            pieces += tokenizer.pieces(word).len();
        }
    }
    if words == 0 {
        return Err(Error::EmptyCorpus("fertility over zero whitespace words".into()));
    }
    Ok(pieces as f64 / words as f64)
}

/// Subword pieces of each segment, in order (per-word pieces concatenated).
pub fn tokenize_segments(segments: &[Segment], tokenizer: &dyn PieceTokenizer) -> Vec<Vec<String>> {
    segments
        .iter()
        .map(|seg| {
            tokenize::tokens(&seg.text)
                .flat_map(|t| tokenizer.pieces(t.text))
                .collect()
        })
        .collect()
}

/// ΔQE: mean over segments of `clean − noisy` quality-estimation scores.
/// Near zero indicates robustness; positive values mean noisy-source
/// translations score worse. Antisymmetric under swapping its arguments.
pub fn delta_qe(qe_clean: &ScoreFile, qe_noisy: &ScoreFile) -> Result<f64> {
    if !qe_clean.same_indices(qe_noisy) {
        return Err(Error::IndexMismatch(format!(
            "ΔQE inputs cover different segments ({} vs {} rows)",
            qe_clean.len(),
            qe_noisy.len()
        )));
    }
    if qe_clean.is_empty() {
        return Err(Error::EmptyCorpus("ΔQE over zero segments".into()));
    }
    let sum: f64 = qe_clean
        .rows()
        .iter()
        .zip(qe_noisy.rows())
        .map(|((_, clean), (_, noisy))| clean - noisy)
        .sum();
    Ok(sum / qe_clean.len() as f64)
}

/// Base metric for a faux score.
pub enum FauxBase<'a> {
    Bleu(&'a BleuParams),
    Chrf(&'a ChrfParams),
    /// Per-segment scores from an external scorer that was given the clean
    /// hypothesis in its reference slot.
    External(&'a ScoreFile),
}

/// Reference-free similarity: the translation of the clean source is
/// treated as a pseudoreference for the translation of the noisy source.
pub fn faux_metric<H: AsRef<str>, C: AsRef<str>>(
    hyp_noisy: &[H],
    hyp_clean: &[C],
    base: FauxBase<'_>,
) -> Result<f64> {
    if hyp_noisy.len() != hyp_clean.len() {
        return Err(Error::IndexMismatch(format!(
            "{} noisy vs {} clean hypotheses",
            hyp_noisy.len(),
            hyp_clean.len()
        )));
    }
    match base {
        FauxBase::Bleu(params) => bleu_corpus(hyp_noisy, hyp_clean, params),
        FauxBase::Chrf(params) => chrf_corpus(hyp_noisy, hyp_clean, params),
        FauxBase::External(scores) => {
            if scores.len() != hyp_noisy.len() {
                return Err(Error::IndexMismatch(format!(
                    "score file has {} rows for {} segments",
                    scores.len(),
                    hyp_noisy.len()
                )));
            }
            scores.mean()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_f1_multiset_semantics() {
        assert_eq!(token_f1(&["a", "b"], &["a", "b"]), 1.0);
        assert_eq!(token_f1(&["a"], &["b"]), 0.0);
        // P = 1/3, R = 1/2 → F1 = 0.4 (multiset intersection counts "a" once)
        let f1 = token_f1(&["a", "a", "b"], &["a", "c"]);
        assert!((f1 - 0.4).abs() < 1e-12, "{f1}");
        // symmetric
        assert_eq!(f1, token_f1(&["a", "c"], &["a", "a", "b"]));
        let empty: [&str; 0] = [];
        assert_eq!(token_f1(&empty, &empty), 1.0);
        assert_eq!(token_f1(&empty, &["x"]), 0.0);
        // order-insensitive, multiset-sensitive
        assert_eq!(token_f1(&["x", "y"], &["y", "x"]), 1.0);
        assert!(token_f1(&["x", "x"], &["x"]) < 1.0);
    }

    fn segs(texts: &[&str]) -> Vec<Segment> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Segment { index: i, text: t.to_string() })
            .collect()
    }

    #[test]
    fn fertility_baselines() {
        let corpus = segs(&["ab cd", "efg"]);
        assert_eq!(fertility(&corpus, &WhitespacePieces).unwrap(), 1.0);
        // chars: (2 + 2 + 3) pieces / 3 words
        let f = fertility(&corpus, &CharPieces).unwrap();
        assert!((f - 7.0 / 3.0).abs() < 1e-12);
        assert_eq!(fertility(&segs(&["ab cd"]), &CharPieces).unwrap(), 2.0);
        assert!(fertility(&segs(&["", "  "]), &WhitespacePieces).is_err());
    }

    #[test]
    fn fertility_with_bpe_merges() {
        // one merge "a b": the corpus "ab ab" splits each word to [a, b]
        // and merges back to a single piece.
        let merges = BpeMerges::parse("a b\n", "t").unwrap();
        assert_eq!(fertility(&segs(&["ab ab"]), &merges).unwrap(), 1.0);
        assert_eq!(fertility(&segs(&["abc"]), &merges).unwrap(), 2.0); // [ab, c]
        let pieces = tokenize_segments(&segs(&["ab abc"]), &merges);
        assert_eq!(pieces, vec![vec!["ab".to_string(), "ab".to_string(), "c".to_string()]]);
    }

    #[test]
    fn delta_qe_identity_and_antisymmetry() {
        let a = ScoreFile::new("s", "qe", vec![(0, 0.85), (1, 0.9), (2, 0.7)]).unwrap();
        let b = ScoreFile::new("s", "qe", vec![(0, 0.80), (1, 0.95), (2, 0.1)]).unwrap();
        assert_eq!(delta_qe(&a, &a).unwrap(), 0.0);
        assert_eq!(delta_qe(&a, &b).unwrap(), -delta_qe(&b, &a).unwrap());
        let constant_clean = ScoreFile::new("s", "qe", vec![(0, 0.85), (1, 0.85)]).unwrap();
        let constant_noisy = ScoreFile::new("s", "qe", vec![(0, 0.80), (1, 0.80)]).unwrap();
        let d = delta_qe(&constant_clean, &constant_noisy).unwrap();
        assert!((d - 0.05).abs() < 1e-12);
        let misaligned = ScoreFile::new("s", "qe", vec![(0, 0.8), (3, 0.9), (4, 0.5)]).unwrap();
        assert!(delta_qe(&a, &misaligned).is_err());
    }

    #[test]
    fn faux_metrics_definitional_cases() {
        let clean = ["the cat sat on the mat", "another clean hypothesis"];
        // y_n == y_c → 100 for both bases
        let bleu_params = BleuParams::default();
        let chrf_params = ChrfParams::default();
        assert_eq!(faux_metric(&clean, &clean, FauxBase::Bleu(&bleu_params)).unwrap(), 100.0);
        assert_eq!(faux_metric(&clean, &clean, FauxBase::Chrf(&chrf_params)).unwrap(), 100.0);
        // all-empty noisy hypotheses → 0 under chrF
        let empty = ["", ""];
        assert_eq!(faux_metric(&empty, &clean, FauxBase::Chrf(&chrf_params)).unwrap(), 0.0);
        // faux-BLEU is exactly the direct call with y_c as reference
        let noisy = ["the cat sat on a mat", "another noisy hypothesis"];
        assert_eq!(
            faux_metric(&noisy, &clean, FauxBase::Bleu(&bleu_params)).unwrap(),
            bleu_corpus(&noisy, &clean, &bleu_params).unwrap()
        );
        // external base: mean of the score file
        let sf = ScoreFile::new("s", "faux-qe", vec![(0, 0.5), (1, 0.7)]).unwrap();
        let v = faux_metric(&noisy, &clean, FauxBase::External(&sf)).unwrap();
        assert!((v - 0.6).abs() < 1e-12);
    }
}

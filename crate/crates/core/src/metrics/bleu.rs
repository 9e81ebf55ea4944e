//! Corpus BLEU with brevity penalty and optional exponential smoothing.
//!
//! Token clipping, length statistics, and the smoothing schedule follow the
//! standard corpus-BLEU reference behavior (`smooth:exp`, full n-gram order
//! in the geometric mean). When an order has no hypothesis n-grams at all
//! its precision stays zero and the score collapses to 0, matching the
//! reference tool with effective order disabled. Tokenization is a
//! parameter: whitespace splitting, one token per non-whitespace character,
//! or pre-tokenized input (already space-separated; split verbatim).

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    /// Exponential: each zero-count order halves a running smoothing value,
    /// giving precision `100 / (2^k · total)`.
    Exp,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BleuTokenizer {
    /// Split on Unicode whitespace.
    Whitespace,
    /// Every non-whitespace character is a token.
    Char,
    /// Input is already tokenized and space-joined; split verbatim. Use
    /// this to consume externally tokenized text (e.g. SentencePiece) —
    /// subword segmentation is not re-implemented here.
    Pretokenized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BleuParams {
    pub max_order: usize,
    pub smoothing: Smoothing,
    pub tokenizer: BleuTokenizer,
}

impl Default for BleuParams {
    fn default() -> Self {
        BleuParams {
            max_order: 4,
            smoothing: Smoothing::Exp,
            tokenizer: BleuTokenizer::Whitespace,
        }
    }
}

impl BleuParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_order == 0 {
            return Err(Error::InvalidParam("BLEU max n-gram order must be ≥ 1".into()));
        }
        Ok(())
    }
}

fn tokenize(text: &str, mode: BleuTokenizer) -> Vec<String> {
    match mode {
        BleuTokenizer::Whitespace | BleuTokenizer::Pretokenized => {
            text.split_whitespace().map(str::to_string).collect()
        }
        BleuTokenizer::Char => text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_string())
            .collect(),
    }
}

/// Corpus BLEU in `[0, 100]`.
pub fn bleu_corpus<H: AsRef<str>, R: AsRef<str>>(
    hyps: &[H],
    refs: &[R],
    params: &BleuParams,
) -> Result<f64> {
    params.validate()?;
    if hyps.len() != refs.len() {
        return Err(Error::IndexMismatch(format!(
            "{} hypotheses vs {} references",
            hyps.len(),
            refs.len()
        )));
    }
    if hyps.is_empty() {
        return Err(Error::EmptyCorpus("BLEU over zero segments".into()));
    }

    let order = params.max_order;
    let mut correct = vec![0u64; order];
    let mut total = vec![0u64; order];
    let mut sys_len = 0u64;
    let mut ref_len = 0u64;

    for (hyp, reference) in hyps.iter().zip(refs) {
        let h = tokenize(hyp.as_ref(), params.tokenizer);
        let r = tokenize(reference.as_ref(), params.tokenizer);
        sys_len += h.len() as u64;
        ref_len += r.len() as u64;
        for n in 1..=order {
            if h.len() >= n {
                total[n - 1] += (h.len() - n + 1) as u64;
            }
            let mut ref_counts: HashMap<&[String], u64> = HashMap::new();
            if r.len() >= n {
                for window in r.windows(n) {
                    *ref_counts.entry(window).or_insert(0) += 1;
                }
            }
            let mut hyp_counts: HashMap<&[String], u64> = HashMap::new();
            if h.len() >= n {
                for window in h.windows(n) {
                    *hyp_counts.entry(window).or_insert(0) += 1;
                }
            }
            correct[n - 1] += hyp_counts
                .iter()
                .map(|(gram, &count)| count.min(ref_counts.get(gram).copied().unwrap_or(0)))
                .sum::<u64>();
        }
    }

    let mut precisions = vec![0.0f64; order];
    let mut smooth = 1.0f64;
    for n in 1..=order {
        if total[n - 1] == 0 {
            break;
        }
        if correct[n - 1] == 0 {
            if params.smoothing == Smoothing::Exp {
                smooth *= 2.0;
                precisions[n - 1] = 100.0 / (smooth * total[n - 1] as f64);
            }
        } else {
            precisions[n - 1] = 100.0 * correct[n - 1] as f64 / total[n - 1] as f64;
        }
    }

    if sys_len == 0 {
        return Ok(0.0);
    }
    let bp = if sys_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / sys_len as f64).exp()
    };
    if precisions.iter().any(|&p| p <= 0.0) {
        return Ok(0.0);
    }
    // All-equal precisions short-circuit the geometric mean so identical
    // corpora score 100 exactly (exp∘ln would leave float dust).
    let geo_mean = if precisions.iter().all(|&p| p == precisions[0]) {
        precisions[0]
    } else {
        (precisions.iter().map(|&p| p.ln()).sum::<f64>() / order as f64).exp()
    };
    Ok((bp * geo_mean).min(100.0))
}

/// BLEU of a single pair (corpus of one).
pub fn bleu_sentence(hyp: &str, reference: &str, params: &BleuParams) -> Result<f64> {
    bleu_corpus(&[hyp], &[reference], params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_corpus_is_exactly_100() {
        let hyps = ["the cat sat on the mat", "a second long sentence appears here"];
        assert_eq!(bleu_corpus(&hyps, &hyps, &BleuParams::default()).unwrap(), 100.0);
    }

    #[test]
    fn all_empty_hypotheses_score_zero() {
        let hyps = ["", ""];
        let refs = ["some reference", "another reference"];
        assert_eq!(bleu_corpus(&hyps, &refs, &BleuParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn matches_hand_computed_smoothing_case() {
        // "a b c d" vs "a b x d": p1 = 75, p2 = 100/3, p3 = p4 = 25 smoothed.
        let expect = (75.0f64 * (100.0 / 3.0) * 25.0 * 25.0).powf(0.25);
        let got = bleu_sentence("a b c d", "a b x d", &BleuParams::default()).unwrap();
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
        // without smoothing the zero orders collapse the score
        let none = BleuParams { smoothing: Smoothing::None, ..BleuParams::default() };
        assert_eq!(bleu_sentence("a b c d", "a b x d", &none).unwrap(), 0.0);
    }

    #[test]
    fn brevity_penalty_applies() {
        // Hypothesis shorter than reference with perfect precision.
        let got = bleu_sentence("a b c d e", "a b c d e f g h i j", &BleuParams::default()).unwrap();
        let expect = 100.0 * (1.0f64 - 2.0).exp();
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
    }

    #[test]
    fn char_tokenizer_mode() {
        let params = BleuParams { tokenizer: BleuTokenizer::Char, ..BleuParams::default() };
        assert_eq!(bleu_sentence("abcd", "ab cd", &params).unwrap(), 100.0);
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        let empty: [&str; 0] = [];
        assert!(bleu_corpus(&empty, &empty, &BleuParams::default()).is_err());
        assert!(bleu_corpus(&["a"], &["a", "b"], &BleuParams::default()).is_err());
    }
}

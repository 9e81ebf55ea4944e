//! Cross-checks chrF and BLEU against frozen reference scores computed by
//! an independent implementation (tools/gen_metric_fixtures.py).

use noisekit::metrics::{
    bleu_corpus, chrf_corpus, chrf_sentence, BleuParams, ChrfParams, Smoothing,
};
use serde::Deserialize;

#[derive(Deserialize)]
struct Fixture {
    pairs: Vec<Pair>,
    corpus: CorpusScores,
}

#[derive(Deserialize)]
struct Pair {
    hyp: String,
    r#ref: String,
    chrf: f64,
}

#[derive(Deserialize)]
struct CorpusScores {
    chrf: f64,
    chrf_whitespace: f64,
    chrf_word_order_2: f64,
    bleu_exp: f64,
    bleu_none: f64,
    bleu_first_20_exp: f64,
    chrf_first_20: f64,
    bleu_edge_exp: f64,
    bleu_edge_none: f64,
    bleu_smooth_exp: f64,
    bleu_smooth_none: f64,
}

fn fixture() -> Fixture {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/metric_scores.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn close(got: f64, want: f64, what: &str) {
    assert!((got - want).abs() < 1e-9, "{what}: got {got}, reference {want}");
}

#[test]
fn sentence_chrf_matches_reference_on_all_pairs() {
    let fixture = fixture();
    let params = ChrfParams::default();
    assert_eq!(fixture.pairs.len(), 50);
    for (i, pair) in fixture.pairs.iter().enumerate() {
        let got = chrf_sentence(&pair.hyp, &pair.r#ref, &params);
        assert!(
            (got - pair.chrf).abs() < 1e-9,
            "pair {i} ({:?} vs {:?}): got {got}, reference {}",
            pair.hyp,
            pair.r#ref,
            pair.chrf
        );
    }
}

#[test]
fn corpus_chrf_matches_reference() {
    let fixture = fixture();
    let hyps: Vec<&str> = fixture.pairs.iter().map(|p| p.hyp.as_str()).collect();
    let refs: Vec<&str> = fixture.pairs.iter().map(|p| p.r#ref.as_str()).collect();

    let default = ChrfParams::default();
    close(chrf_corpus(&hyps, &refs, &default).unwrap(), fixture.corpus.chrf, "chrf");
    close(
        chrf_corpus(&hyps[..20], &refs[..20], &default).unwrap(),
        fixture.corpus.chrf_first_20,
        "chrf first 20",
    );

    let whitespace = ChrfParams { whitespace: true, ..ChrfParams::default() };
    close(
        chrf_corpus(&hyps, &refs, &whitespace).unwrap(),
        fixture.corpus.chrf_whitespace,
        "chrf space:yes",
    );

    let word2 = ChrfParams { word_order: 2, ..ChrfParams::default() };
    close(
        chrf_corpus(&hyps, &refs, &word2).unwrap(),
        fixture.corpus.chrf_word_order_2,
        "chrf nw:2",
    );
}

#[test]
fn corpus_bleu_matches_reference() {
    let fixture = fixture();
    let hyps: Vec<&str> = fixture.pairs.iter().map(|p| p.hyp.as_str()).collect();
    let refs: Vec<&str> = fixture.pairs.iter().map(|p| p.r#ref.as_str()).collect();

    let exp = BleuParams::default();
    let none = BleuParams { smoothing: Smoothing::None, ..BleuParams::default() };

    close(bleu_corpus(&hyps, &refs, &exp).unwrap(), fixture.corpus.bleu_exp, "bleu exp");
    close(bleu_corpus(&hyps, &refs, &none).unwrap(), fixture.corpus.bleu_none, "bleu none");
    close(
        bleu_corpus(&hyps[..20], &refs[..20], &exp).unwrap(),
        fixture.corpus.bleu_first_20_exp,
        "bleu first 20",
    );
    close(
        bleu_corpus(&hyps[44..], &refs[44..], &exp).unwrap(),
        fixture.corpus.bleu_edge_exp,
        "bleu edge exp",
    );
    close(
        bleu_corpus(&hyps[44..], &refs[44..], &none).unwrap(),
        fixture.corpus.bleu_edge_none,
        "bleu edge none",
    );

    let smooth_pair_hyp = ["one two three four five"];
    let smooth_pair_ref = ["one two xxx four five"];
    close(
        bleu_corpus(&smooth_pair_hyp, &smooth_pair_ref, &exp).unwrap(),
        fixture.corpus.bleu_smooth_exp,
        "bleu smoothing pair exp",
    );
    close(
        bleu_corpus(&smooth_pair_hyp, &smooth_pair_ref, &none).unwrap(),
        fixture.corpus.bleu_smooth_none,
        "bleu smoothing pair none",
    );
}

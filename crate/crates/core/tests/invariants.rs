//! Property tests for the crate-wide invariants: edit-shape laws of the
//! noise primitives, provenance replay, serialization round-trips, metric
//! ranges and symmetries, and slope-fit equivalence with an independent
//! numeric minimizer.

use std::collections::HashMap;

use noisekit::analysis::fit_decline_slope;
use noisekit::corpus::{noised_from_jsonl, noised_to_jsonl, Segment};
use noisekit::datagen::{mix_noise, MixSpec};
use noisekit::hangul;
use noisekit::metrics::{bleu_corpus, chrf_sentence, token_f1, BleuParams, ChrfParams};
use noisekit::noise::{
    replay_segment, NoiseEngine, NoiseSpec, NoiseType, PerturbationAction, PerturbationRecord,
};
use proptest::prelude::*;

fn char_multiset(s: &str) -> HashMap<char, usize> {
    let mut m = HashMap::new();
    for c in s.chars() {
        *m.entry(c).or_insert(0) += 1;
    }
    m
}

fn is_subsequence(needle: &str, haystack: &str) -> bool {
    let mut it = haystack.chars();
    needle.chars().all(|c| it.by_ref().any(|h| h == c))
}

/// Mixed-script text with varied whitespace.
fn text_strategy() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-zA-Z0-9éüß한글ㅏ ,.!\t-]{0,60}").unwrap()
}

fn noise_type_strategy() -> impl Strategy<Value = NoiseType> {
    prop_oneof![
        Just(NoiseType::Swap),
        Just(NoiseType::Dupe),
        Just(NoiseType::Drop),
        Just(NoiseType::Key),
    ]
}

fn engine(noise_type: NoiseType, p: f64, seed: u64) -> NoiseEngine {
    let layout = (noise_type == NoiseType::Key).then(|| "qwerty".to_string());
    NoiseEngine::new(NoiseSpec { noise_type, p, seed, layout }).unwrap()
}

proptest! {
    #[test]
    fn noise_edit_shape_laws(
        text in text_strategy(),
        noise_type in noise_type_strategy(),
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let eng = engine(noise_type, p, seed);
        let (noised, records) = eng.noise_segment(0, &text);

        // at most one record per token, indices valid
        let n_tokens = text.split_whitespace().count();
        let mut seen = std::collections::HashSet::new();
        for r in &records {
            prop_assert!(r.token_index < n_tokens);
            prop_assert!(seen.insert(r.token_index), "token {} recorded twice", r.token_index);
        }

        // token count preserved, whitespace byte-exact
        prop_assert_eq!(noised.split_whitespace().count(), n_tokens);
        let ws = |s: &str| s.chars().filter(|c| c.is_whitespace()).collect::<String>();
        prop_assert_eq!(ws(&text), ws(&noised));

        // per-token edit-shape laws
        let base_tokens: Vec<&str> = text.split_whitespace().collect();
        let noised_tokens: Vec<&str> = noised.split_whitespace().collect();
        let applied: HashMap<usize, &PerturbationRecord> = records
            .iter()
            .filter(|r| r.is_applied())
            .map(|r| (r.token_index, r))
            .collect();
        for (i, (before, after)) in base_tokens.iter().zip(&noised_tokens).enumerate() {
            let n_before = before.chars().count();
            let n_after = after.chars().count();
            match applied.get(&i) {
                None => prop_assert_eq!(before, after),
                Some(r) => match r.noise_type {
                    NoiseType::Swap => {
                        prop_assert_eq!(n_before, n_after);
                        prop_assert_eq!(char_multiset(before), char_multiset(after));
                    }
                    NoiseType::Dupe => prop_assert_eq!(n_after, n_before + 1),
                    NoiseType::Drop => {
                        prop_assert_eq!(n_after, n_before - 1);
                        prop_assert!(is_subsequence(after, before));
                    }
                    NoiseType::Key => prop_assert_eq!(n_after, n_before), // latin layout
                },
            }
        }
    }

    #[test]
    fn p_zero_identity_p_one_covers_eligible(
        text in text_strategy(),
        noise_type in noise_type_strategy(),
        seed in any::<u64>(),
    ) {
        let (clean, records) = engine(noise_type, 0.0, seed).noise_segment(0, &text);
        prop_assert_eq!(&clean, &text);
        prop_assert!(records.is_empty());

        let (_, records) = engine(noise_type, 1.0, seed).noise_segment(0, &text);
        prop_assert_eq!(records.len(), text.split_whitespace().count());
    }

    #[test]
    fn replay_reproduces_noised_text(
        text in text_strategy(),
        noise_type in noise_type_strategy(),
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let eng = engine(noise_type, p, seed);
        let (noised, records) = eng.noise_segment(3, &text);
        let layout = eng.layout().map(|l| l.as_ref());
        prop_assert_eq!(replay_segment(&text, &records, layout).unwrap(), noised);
    }

    #[test]
    fn determinism_is_independent_of_thread_count(
        texts in proptest::collection::vec(text_strategy(), 1..20),
        noise_type in noise_type_strategy(),
        seed in any::<u64>(),
    ) {
        let segments: Vec<Segment> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Segment { index: i, text: t.clone() })
            .collect();
        let eng = engine(noise_type, 0.6, seed);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = single.install(|| eng.noise_corpus("c", &segments));
        let b = many.install(|| eng.noise_corpus("c", &segments));
        prop_assert_eq!(noised_to_jsonl(&a), noised_to_jsonl(&b));
    }

    #[test]
    fn noised_jsonl_round_trips(
        texts in proptest::collection::vec(text_strategy(), 0..12),
        noise_type in noise_type_strategy(),
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let segments: Vec<Segment> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Segment { index: i, text: t.clone() })
            .collect();
        let corpus = engine(noise_type, p, seed).noise_corpus("base-id", &segments);
        let jsonl = noised_to_jsonl(&corpus);
        prop_assert_eq!(jsonl.lines().count(), segments.len());
        if !segments.is_empty() {
            let parsed = noised_from_jsonl(&jsonl, "prop").unwrap();
            prop_assert_eq!(&parsed, &corpus);
            prop_assert_eq!(noised_to_jsonl(&parsed), jsonl);
        }
    }

    #[test]
    fn mixed_noise_is_disjoint_and_replayable(
        texts in proptest::collection::vec(text_strategy(), 1..10),
        rate in 0.0f64..=0.25,
        seed in any::<u64>(),
    ) {
        let segments: Vec<Segment> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Segment { index: i, text: t.clone() })
            .collect();
        let mix = MixSpec::uniform(rate, seed, Some("qwerty".into())).unwrap();
        let corpus = mix_noise("c", &segments, &mix).unwrap();
        let layout = noisekit::layout::KeyboardLayout::resolve("qwerty").unwrap();
        for (seg, base) in corpus.segments.iter().zip(&segments) {
            let mut seen = std::collections::HashSet::new();
            for r in &seg.perturbations {
                prop_assert!(seen.insert(r.token_index));
            }
            let replayed = replay_segment(&base.text, &seg.perturbations, Some(&layout)).unwrap();
            prop_assert_eq!(&replayed, &seg.text);
        }
    }

    #[test]
    fn hangul_round_trip_on_random_syllables(
        codes in proptest::collection::vec(0xAC00u32..0xD7A4, 0..20),
        ascii in "[a-z ]{0,10}",
    ) {
        let mut text = ascii;
        for c in codes {
            text.push(char::from_u32(c).unwrap());
        }
        prop_assert_eq!(hangul::compose(&hangul::decompose(&text)), text);
    }

    #[test]
    fn token_f1_symmetry_and_identity(
        a in proptest::collection::vec("[a-d]{1,3}", 0..12),
        b in proptest::collection::vec("[a-d]{1,3}", 0..12),
    ) {
        let fwd = token_f1(&a, &b);
        let back = token_f1(&b, &a);
        prop_assert!((fwd - back).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&fwd));

        let mut sa = a.clone();
        let mut sb = b.clone();
        sa.sort();
        sb.sort();
        if sa == sb {
            prop_assert_eq!(fwd, 1.0);
        } else {
            prop_assert!(fwd < 1.0);
        }
    }

    #[test]
    fn metric_ranges_on_random_pairs(
        hyp in text_strategy(),
        reference in text_strategy(),
    ) {
        let c = chrf_sentence(&hyp, &reference, &ChrfParams::default());
        prop_assert!((0.0..=100.0).contains(&c), "chrf {c}");
        let b = bleu_corpus(&[hyp.as_str()], &[reference.as_str()], &BleuParams::default()).unwrap();
        prop_assert!((0.0..=100.0).contains(&b), "bleu {b}");
    }

    #[test]
    fn slope_fit_matches_numeric_minimizer(
        points in proptest::collection::vec((0.01f64..=1.0, -100.0f64..=100.0), 1..12),
    ) {
        let fit = fit_decline_slope(&points).unwrap();
        let oracle = minimize_rss_by_bisection(&points);
        prop_assert!((fit.slope - oracle).abs() < 1e-9, "fit {} vs oracle {}", fit.slope, oracle);
    }

    #[test]
    fn slope_scale_equivariance(
        points in proptest::collection::vec((0.01f64..=1.0, -100.0f64..=100.0), 1..12),
        scale in -5.0f64..=5.0,
    ) {
        let base = fit_decline_slope(&points).unwrap().slope;
        let scaled: Vec<(f64, f64)> = points.iter().map(|&(p, d)| (p, d * scale)).collect();
        let got = fit_decline_slope(&scaled).unwrap().slope;
        prop_assert!((got - base * scale).abs() < 1e-9 * (1.0 + base.abs() * scale.abs()));
    }

    #[test]
    fn slope_origin_inclusion_invariance(
        points in proptest::collection::vec((0.01f64..=1.0, -100.0f64..=100.0), 1..12),
    ) {
        let without = fit_decline_slope(&points).unwrap();
        let mut with = points.clone();
        with.insert(0, (0.0, 0.0));
        let including = fit_decline_slope(&with).unwrap();
        prop_assert_eq!(without.slope, including.slope);
        prop_assert_eq!(without.rss, including.rss);
    }
}

/// Independent slope oracle: the RSS derivative `g(s) = Σ p·(d − s·p)` is
/// strictly decreasing, so its root (the least-squares slope) is found by
/// sign bisection without using the closed form.
fn minimize_rss_by_bisection(points: &[(f64, f64)]) -> f64 {
    let g = |s: f64| points.iter().map(|&(p, d)| p * (d - s * p)).sum::<f64>();
    let (mut lo, mut hi) = (-1.0e6, 1.0e6);
    assert!(g(lo) > 0.0 && g(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn replay_rejects_duplicate_records() {
    let record = PerturbationRecord {
        token_index: 0,
        noise_type: NoiseType::Dupe,
        action: PerturbationAction::Applied { char_position: 0, detail: "a".into() },
    };
    assert!(replay_segment("ab", &[record.clone(), record], None).is_err());
}

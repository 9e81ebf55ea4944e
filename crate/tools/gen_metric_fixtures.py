#!/usr/bin/env python3
"""Generates frozen reference scores for the chrF/BLEU cross-check tests.

This file implements both metrics directly from their published
definitions, independently of the Rust implementation, and freezes the
scores for a fixed set of sentence pairs into
crates/core/tests/fixtures/metric_scores.json. The test suite compares the
Rust metrics against these values.

chrF here follows the canonical tool conventions: character n-grams up to
order 6 over whitespace-stripped text, beta = 2, per-order F averaged over
the orders present in either side (effective order). BLEU is corpus BLEU
over whitespace tokens with exponential smoothing and brevity penalty.

Run from the repository root:  python3 tools/gen_metric_fixtures.py
"""

import json
import math
import random
from collections import Counter
from pathlib import Path




def char_ngrams(text, order, keep_ws):
    if not keep_ws:
        text = "".join(text.split())
    chars = list(text)
    return [
        Counter(tuple(chars[i : i + n]) for i in range(len(chars) - n + 1))
        for n in range(1, order + 1)
    ]


def word_ngrams(text, order):
    words = text.split()
    return [
        Counter(tuple(words[i : i + n]) for i in range(len(words) - n + 1))
        for n in range(1, order + 1)
    ]


def pair_stats(hyp, ref, char_order, word_order, keep_ws):
    hyp_grams = char_ngrams(hyp, char_order, keep_ws) + word_ngrams(hyp, word_order)
    ref_grams = char_ngrams(ref, char_order, keep_ws) + word_ngrams(ref, word_order)
    stats = []
    for h, r in zip(hyp_grams, ref_grams):
        match = sum(min(count, r[gram]) for gram, count in h.items())
        stats.append([sum(h.values()), sum(r.values()), match])
    return stats


def f_from_stats(stats, beta, effective_order):
    # Orders with no n-grams on either side are excluded from the average;
    # zero-match orders contribute exactly zero (the canonical tool uses
    # 1e-16 epsilons instead, which differs by < 1e-14 points).
    factor = beta * beta
    total = 0.0
    effective = 0
    for n_hyp, n_ref, n_match in stats:
        if n_hyp + n_ref == 0:
            continue
        prec = n_match / n_hyp if n_hyp > 0 else 0.0
        rec = n_match / n_ref if n_ref > 0 else 0.0
        denom = factor * prec + rec
        if denom > 0:
            total += (1 + factor) * prec * rec / denom
        effective += 1
    if effective_order:
        return 0.0 if effective == 0 else 100.0 * total / effective
    return 100.0 * total / len(stats)


def chrf_sentence(hyp, ref, char_order=6, word_order=0, beta=2.0, keep_ws=False,
                  effective_order=True):
    if not hyp and not ref:
        return 100.0
    stats = pair_stats(hyp, ref, char_order, word_order, keep_ws)
    return f_from_stats(stats, beta, effective_order)


def chrf_corpus(pairs, char_order=6, word_order=0, beta=2.0, keep_ws=False,
                effective_order=True):
    agg = None
    for hyp, ref in pairs:
        stats = pair_stats(hyp, ref, char_order, word_order, keep_ws)
        if agg is None:
            agg = stats
        else:
            for a, s in zip(agg, stats):
                a[0] += s[0]
                a[1] += s[1]
                a[2] += s[2]
    return f_from_stats(agg, beta, effective_order)


def bleu_corpus(pairs, max_order=4, smoothing="exp"):
    correct = [0] * max_order
    total = [0] * max_order
    sys_len = 0
    ref_len = 0
    for hyp, ref in pairs:
        h = hyp.split()
        r = ref.split()
        sys_len += len(h)
        ref_len += len(r)
        for n in range(1, max_order + 1):
            h_grams = Counter(tuple(h[i : i + n]) for i in range(len(h) - n + 1))
            r_grams = Counter(tuple(r[i : i + n]) for i in range(len(r) - n + 1))
            total[n - 1] += max(len(h) - n + 1, 0)
            correct[n - 1] += sum(min(c, r_grams[g]) for g, c in h_grams.items())

    precisions = [0.0] * max_order
    smooth = 1.0
    for n in range(1, max_order + 1):
        if total[n - 1] == 0:
            break
        if correct[n - 1] == 0:
            if smoothing == "exp":
                smooth *= 2.0
                precisions[n - 1] = 100.0 / (smooth * total[n - 1])
        else:
            precisions[n - 1] = 100.0 * correct[n - 1] / total[n - 1]

    if sys_len == 0:
        return 0.0
    bp = 1.0 if sys_len >= ref_len else math.exp(1.0 - ref_len / sys_len)
    if any(p <= 0.0 for p in precisions):
        return 0.0
    if all(p == precisions[0] for p in precisions):
        geo_mean = precisions[0]  # exact when all orders agree (e.g. 100)
    else:
        geo_mean = math.exp(sum(math.log(p) for p in precisions) / max_order)
    return min(bp * geo_mean, 100.0)


def self_check():
    # Hand-computed: hyp "ab" vs ref "abc", char order 2, beta 2.
    # order 1: P=1, R=2/3 -> F=5/7; order 2: P=1, R=1/2 -> F=5/9.
    expect = 100.0 * (5.0 / 7.0 + 5.0 / 9.0) / 2.0
    got = chrf_sentence("ab", "abc", char_order=2)
    assert abs(got - expect) < 1e-12, (got, expect)

    # Identity is exactly 100 even for strings shorter than the max order.
    assert chrf_sentence("cat", "cat") == 100.0
    assert chrf_corpus([("cat sat", "cat sat"), ("ab", "ab")]) == 100.0
    assert chrf_sentence("abc", "xyz") == 0.0

    # Hand-computed BLEU: "a b c d" vs "a b x d"
    # p1=75, p2=100/3, p3=25 (smoothed), p4=25 (smoothed), BP=1
    expect = (75.0 * (100.0 / 3.0) * 25.0 * 25.0) ** 0.25
    got = bleu_corpus([("a b c d", "a b x d")])
    assert abs(got - expect) < 1e-9, (got, expect)

    assert bleu_corpus([("the cat sat on the mat", "the cat sat on the mat")]) == 100.0
    assert bleu_corpus([("", "some reference here")]) == 0.0


POOL = [
    "The committee will reconvene on Tuesday to finalize the budget proposal.",
    "A recent survey suggests that most commuters prefer trains over buses.",
    "Die Ergebnisse der Studie wurden gestern in Berlin vorgestellt.",
    "Der schnelle braune Fuchs springt über den faulen Hund.",
    "Les négociations ont repris après une courte pause estivale.",
    "Le château médiéval domine toute la vallée depuis huit siècles.",
    "O novo sistema de transporte público será inaugurado em março.",
    "As chuvas fortes causaram inundações em várias regiões do país.",
    "정부는 내년 예산안을 국회에 제출할 예정이다.",
    "서울의 밤거리는 네온사인으로 가득하다.",
    "The quick brown fox jumps over the lazy dog.",
    "Zwölf Boxkämpfer jagen Viktor quer über den großen Sylter Deich.",
    "Portez ce vieux whisky au juge blond qui fume.",
    "Numbers like 3.14159 and 2,718 appear mid-sentence sometimes.",
    "Mixed scripts: latin text with 한글 and symbols (£, €, §).",
    "short",
    "Two words.",
    "Punctuation, quotes \"inside\", and trailing ellipsis...",
    "A sentence that is noticeably longer than the others in this small pool, "
    "containing several clauses, a few commas, and enough tokens to exercise "
    "higher-order n-gram statistics properly.",
    "tabs\tand  double  spaces are collapsed by tokenization",
]


def mutate(rng, text):
    ops = []
    words = text.split()
    kind = rng.randrange(5)
    if kind == 0 and len(words) > 2:  # drop a word
        del words[rng.randrange(len(words))]
        return " ".join(words)
    if kind == 1 and len(words) > 3:  # swap two words
        i = rng.randrange(len(words) - 1)
        words[i], words[i + 1] = words[i + 1], words[i]
        return " ".join(words)
    if kind == 2 and len(text) > 4:  # character typo
        chars = list(text)
        i = rng.randrange(len(chars) - 1)
        chars[i], chars[i + 1] = chars[i + 1], chars[i]
        return "".join(chars)
    if kind == 3 and len(words) > 4:  # truncate
        return " ".join(words[: rng.randrange(2, len(words))])
    return text  # identical


# No matching 4-gram, so exponential smoothing and no smoothing diverge.
SMOOTH_PAIR = ("one two three four five", "one two xxx four five")


def build_pairs():
    rng = random.Random(12345)
    pairs = []
    # mutated / identical pairs from the pool
    while len(pairs) < 44:
        ref = POOL[rng.randrange(len(POOL))]
        hyp = mutate(rng, ref)
        if rng.random() < 0.15:  # unrelated hypothesis
            hyp = POOL[rng.randrange(len(POOL))]
        pairs.append((hyp, ref))
    # fixed edge cases
    pairs.append(("", "a non-empty reference sentence"))
    pairs.append(("a non-empty hypothesis", ""))
    pairs.append(("a", "a"))
    pairs.append(("ab", "abc"))
    pairs.append(("한글 텍스트 처리", "한글 텍스트 처리가 필요하다"))
    pairs.append(("abc def", "xyz uvw"))
    assert len(pairs) == 50
    return pairs


def main():
    self_check()
    pairs = build_pairs()
    fixture = {
        "comment": "frozen reference scores; regenerate with tools/gen_metric_fixtures.py",
        "chrf": {"char_order": 6, "word_order": 0, "beta": 2.0, "whitespace": False,
                 "effective_order": True},
        "bleu": {"max_order": 4, "tokenizer": "whitespace"},
        "pairs": [
            {"hyp": h, "ref": r, "chrf": chrf_sentence(h, r)} for h, r in pairs
        ],
        "corpus": {
            "chrf": chrf_corpus(pairs),
            "chrf_whitespace": chrf_corpus(pairs, keep_ws=True),
            "chrf_word_order_2": chrf_corpus(pairs, word_order=2),
            "bleu_exp": bleu_corpus(pairs, smoothing="exp"),
            "bleu_none": bleu_corpus(pairs, smoothing="none"),
            "bleu_first_20_exp": bleu_corpus(pairs[:20], smoothing="exp"),
            "chrf_first_20": chrf_corpus(pairs[:20]),
            "bleu_edge_exp": bleu_corpus(pairs[44:], smoothing="exp"),
            "bleu_edge_none": bleu_corpus(pairs[44:], smoothing="none"),
            "bleu_smooth_exp": bleu_corpus([SMOOTH_PAIR], smoothing="exp"),
            "bleu_smooth_none": bleu_corpus([SMOOTH_PAIR], smoothing="none"),
        },
    }
    out = Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/metric_scores.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(fixture, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    print(f"  corpus chrf  = {fixture['corpus']['chrf']:.4f}")
    print(f"  corpus bleu  = {fixture['corpus']['bleu_exp']:.4f}")


if __name__ == "__main__":
    main()

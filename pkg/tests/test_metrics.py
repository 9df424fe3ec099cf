import json
import random
import time
from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from viramkit.errors import ReportColumnError
from viramkit.metrics import (
    MetricConfig,
    MetricReport,
    build_report,
    chrf,
    corpus_bleu,
    cosine_metric,
    tokenize_intl,
    tokenize_whitespace,
)

GOLDEN_DIR = Path(__file__).parent / "data" / "golden"

WS = MetricConfig(tokenizer="whitespace")


# ----------------------------------------------------------------- tokenizers


@pytest.mark.parametrize(
    "text,expected",
    [
        ("Hello, world!", ["Hello", ",", "world", "!"]),
        ("state-of-the-art", ["state", "-", "of", "-", "the", "-", "art"]),
        ("3.14", ["3.14"]),  # punctuation between digits stays attached
        ("a+b=c", ["a", "+", "b", "=", "c"]),  # symbols always split
        ("", []),
        ("   ", []),
    ],
)
def test_tokenize_intl_cases(text, expected):
    assert tokenize_intl(text) == expected


def test_tokenize_intl_devanagari():
    # danda and comma are Po; they split even between Devanagari letters
    assert tokenize_intl("जे पाहतो, त्यावर।") == ["जे", "पाहतो", ",", "त्यावर", "।"]


def test_tokenize_whitespace():
    assert tokenize_whitespace("a  b\tc") == ["a", "b", "c"]


def test_metric_config_rejects_unknown_tokenizer():
    with pytest.raises(ValueError, match="tokenizer"):
        MetricConfig(tokenizer="mecab")


def test_metric_config_rejects_bad_orders():
    with pytest.raises(ValueError):
        MetricConfig(bleu_max_order=0)
    with pytest.raises(ValueError):
        MetricConfig(beta=-1.0)


# ----------------------------------------------------------------- frozen values


def test_bleu_worked_example_frozen():
    # unigram 1/4; higher orders smoothed 1/6, 1/8, 1/8; brevity penalty 1
    assert corpus_bleu(["the the the the"], ["the cat"], WS) == pytest.approx(
        15.97357760615681, abs=1e-12
    )


def test_chrf_worked_example_frozen():
    expected = 700.0 / 24.0
    assert chrf(["abc"], ["abd"], WS) == pytest.approx(expected, abs=1e-12)
    # precision equals recall on this pair, so beta cannot matter
    assert chrf(["abc"], ["abd"], replace(WS, beta=1.0)) == pytest.approx(expected, abs=1e-12)


def test_cosine_frozen():
    got = cosine_metric([[1.0, 0.0], [1.0, 0.0]], [[1.0, 1.0], [0.0, 1.0]])
    assert got == pytest.approx(0.35355339059327373, abs=1e-12)


def test_golden_bleu_reference_scorer():
    hyps = (GOLDEN_DIR / "hyp.txt").read_text(encoding="utf-8").splitlines()
    refs = (GOLDEN_DIR / "ref.txt").read_text(encoding="utf-8").splitlines()
    frozen = json.loads((GOLDEN_DIR / "golden_bleu.json").read_text(encoding="utf-8"))
    assert len(hyps) == frozen["sentences"]
    got = corpus_bleu(hyps, refs, MetricConfig(tokenizer="intl"))
    assert got == pytest.approx(frozen["bleu"], abs=0.1)


# ----------------------------------------------------------------- identities


@pytest.mark.parametrize(
    "corpus",
    [
        ["a"],
        ["short one", "b c"],
        ["जे पाहतो, त्यावर विश्वास ठेवतो; जे ऐकतो, त्याची नोंद घेतो."],
        ["one two three four five six", "x", "y z"],
    ],
)
def test_identity_scores_100(corpus):
    assert corpus_bleu(corpus, list(corpus)) == pytest.approx(100.0, abs=1e-9)
    assert chrf(corpus, list(corpus)) == pytest.approx(100.0, abs=1e-9)


def test_empty_hypotheses_score_zero_with_warning(caplog):
    with caplog.at_level("WARNING", logger="viramkit.metrics"):
        assert corpus_bleu(["", ""], ["a b", "c d"], WS) == 0.0
    assert any("empty" in rec.message.lower() for rec in caplog.records)


def test_cosine_identity_is_100_percent_similar():
    vecs = [[0.3, 0.4], [1.0, 2.0], [5.0, 0.1]]
    assert cosine_metric(vecs, [list(v) for v in vecs]) == pytest.approx(1.0, abs=1e-12)


def test_cosine_rejects_dimension_mismatch():
    with pytest.raises(ValueError, match="1"):
        cosine_metric([[1.0, 0.0], [1.0]], [[0.0, 1.0], [1.0, 0.0]])


def test_cosine_rejects_zero_vector():
    with pytest.raises(ValueError, match="zero"):
        cosine_metric([[0.0, 0.0]], [[1.0, 0.0]])


# ----------------------------------------------------------------- oracle agreement

_VOCAB = ["ab", "cd", "ef", "gh"]


def _random_corpus(rng: random.Random) -> list[str]:
    sentences = []
    for _ in range(rng.randint(1, 5)):
        sentences.append(" ".join(rng.choice(_VOCAB) for _ in range(rng.randint(1, 8))))
    return sentences


def test_bleu_matches_oracle_on_random_corpora():
    rng = random.Random(20240817)
    for _ in range(1000):
        hyps = _random_corpus(rng)
        refs = [" ".join(rng.choice(_VOCAB) for _ in range(rng.randint(1, 8))) for _ in hyps]
        expected = oracles.bleu_oracle(hyps, refs)
        got = corpus_bleu(hyps, refs, WS)
        assert got == pytest.approx(expected, rel=1e-9, abs=1e-9), (hyps, refs)


def test_chrf_matches_oracle_on_random_corpora():
    rng = random.Random(20240818)
    for _ in range(1000):
        hyps = _random_corpus(rng)
        refs = [" ".join(rng.choice(_VOCAB) for _ in range(rng.randint(1, 8))) for _ in hyps]
        for beta in (1.0, 2.0):
            expected = oracles.chrf_oracle(hyps, refs, beta=beta)
            got = chrf(hyps, refs, replace(WS, beta=beta))
            assert got == pytest.approx(expected, rel=1e-9, abs=1e-9), (hyps, refs, beta)


# ----------------------------------------------------------------- invariants

_sentence = st.lists(st.sampled_from(_VOCAB), min_size=1, max_size=8).map(" ".join)
_corpus = st.lists(_sentence, min_size=1, max_size=5)


@given(hyps=_corpus, data=st.data())
@settings(max_examples=60, deadline=None)
def test_bleu_bounded_and_permutation_invariant(hyps, data):
    refs = data.draw(st.lists(_sentence, min_size=len(hyps), max_size=len(hyps)))
    score = corpus_bleu(hyps, refs, WS)
    assert 0.0 <= score <= 100.0
    order = data.draw(st.permutations(range(len(hyps))))
    shuffled = corpus_bleu([hyps[i] for i in order], [refs[i] for i in order], WS)
    assert shuffled == pytest.approx(score, rel=1e-9, abs=1e-9)


@given(hyps=_corpus, data=st.data())
@settings(max_examples=60, deadline=None)
def test_chrf_bounded_and_permutation_invariant(hyps, data):
    refs = data.draw(st.lists(_sentence, min_size=len(hyps), max_size=len(hyps)))
    score = chrf(hyps, refs, WS)
    assert 0.0 <= score <= 100.0
    order = data.draw(st.permutations(range(len(hyps))))
    shuffled = chrf([hyps[i] for i in order], [refs[i] for i in order], WS)
    assert shuffled == pytest.approx(score, rel=1e-9, abs=1e-9)


def _corrupt(sentence: str, k: int) -> str:
    """Replace the first k tokens with tokens from a disjoint alphabet."""
    tokens = sentence.split()
    return " ".join(f"zq{i}" if i < k else tok for i, tok in enumerate(tokens))


@given(refs=_corpus, seed=st.integers(0, 2**16))
@settings(max_examples=40, deadline=None)
def test_more_corruption_never_scores_higher(refs, seed):
    rng = random.Random(seed)
    k = rng.randint(0, max(len(r.split()) for r in refs))
    lighter = [_corrupt(r, max(0, k - 1)) for r in refs]
    heavier = [_corrupt(r, k) for r in refs]
    assert corpus_bleu(heavier, refs, WS) <= corpus_bleu(lighter, refs, WS) + 1e-9
    assert chrf(heavier, refs, WS) <= chrf(lighter, refs, WS) + 1e-9


def test_identity_scoring_is_fast():
    corpus = [f"sentence number {i} with a few more words attached" for i in range(100)]
    start = time.perf_counter()
    corpus_bleu(corpus, list(corpus))
    chrf(corpus, list(corpus))
    assert time.perf_counter() - start < 1.0


# ----------------------------------------------------------------- reports


class _StubEmbedder:
    def embed(self, texts):
        return [[1.0, float(len(t))] for t in texts]


class _StubScorer:
    def score_pairs(self, sources, hypotheses, references):
        return [0.75] * len(hypotheses)


class _BrokenEmbedder:
    def embed(self, texts):
        raise RuntimeError("socket closed")


def test_build_report_core_columns():
    report = build_report("sys", ["a b"], ["a b"])
    assert report.system_name == "sys"
    assert report.bleu == pytest.approx(100.0)
    assert report.chrf_pp == pytest.approx(100.0)
    assert report.chrf2_pp == pytest.approx(100.0)
    assert report.cosine_embed is None and report.learned_score is None
    assert report.n_instances == 1


def test_build_report_optional_columns():
    report = build_report(
        "sys",
        ["a b"],
        ["a b"],
        embed_client=_StubEmbedder(),
        score_client=_StubScorer(),
        sources=["a b"],
    )
    assert report.cosine_embed == pytest.approx(1.0)
    assert report.learned_score == pytest.approx(0.75)


def test_build_report_wraps_backend_failures():
    with pytest.raises(ReportColumnError, match="cosine_embed"):
        build_report("sys", ["a"], ["a"], embed_client=_BrokenEmbedder())


def test_build_report_scorer_requires_sources():
    with pytest.raises(ValueError, match="sources"):
        build_report("sys", ["a"], ["a"], score_client=_StubScorer())


def test_report_dict_round_trip():
    report = build_report("sys", ["a b c"], ["a b d"])
    assert MetricReport.from_dict(report.to_dict()) == report


def test_report_rejects_out_of_range_scores():
    with pytest.raises(ValueError):
        MetricReport(
            system_name="sys",
            bleu=101.0,
            chrf_pp=50.0,
            chrf2_pp=50.0,
            cosine_embed=None,
            learned_score=None,
            n_instances=1,
        )

"""Corpus-level translation metrics: BLEU, the chrF family, cosine aggregation.

All scorers are case-sensitive, single-reference, and corpus-level
(micro-averaged counts, not averaged sentence scores).  Boundary rules that
the textbook formulas leave undefined: n-gram orders with no hypothesis
n-grams anywhere in the corpus are skipped from BLEU's geometric mean, and
chrF orders empty on both sides are skipped from the F average — so identical
hypothesis/reference corpora score exactly 100.0 regardless of sentence
length.  All-empty hypotheses score 0.0 with a logged warning.
"""

from __future__ import annotations

import logging
import math
import unicodedata
from collections import Counter
from dataclasses import asdict, dataclass, replace
from typing import Protocol, Sequence

from .errors import ReportColumnError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricConfig:
    bleu_max_order: int = 4
    chr_char_order: int = 6
    chr_word_order: int = 2
    beta: float = 2.0
    tokenizer: str = "intl"

    def __post_init__(self) -> None:
        if min(self.bleu_max_order, self.chr_char_order, self.chr_word_order) < 1:
            raise ValueError("n-gram orders must be >= 1")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.tokenizer not in {"intl", "whitespace"}:
            raise ValueError(f"unknown tokenizer {self.tokenizer!r}")


def tokenize_intl(text: str) -> list[str]:
    """Language-agnostic tokenization for metric computation.

    Every Unicode punctuation character (category P*) becomes its own token
    unless both neighbouring characters are decimal digits ("3.14" stays
    whole); symbol characters (category S*) always split; then the text is
    split on whitespace.  Letters — Devanagari included — are never split.
    """
    n = len(text)
    out: list[str] = []
    for i, ch in enumerate(text):
        cat = unicodedata.category(ch)
        if cat.startswith("P"):
            prev_digit = i > 0 and unicodedata.category(text[i - 1]) == "Nd"
            next_digit = i + 1 < n and unicodedata.category(text[i + 1]) == "Nd"
            if prev_digit and next_digit:
                out.append(ch)
            else:
                out.append(" ")
                out.append(ch)
                out.append(" ")
        elif cat.startswith("S"):
            out.append(" ")
            out.append(ch)
            out.append(" ")
        else:
            out.append(ch)
    return "".join(out).split()


def tokenize_whitespace(text: str) -> list[str]:
    return text.split()


_TOKENIZERS = {"intl": tokenize_intl, "whitespace": tokenize_whitespace}


def _ngram_counts(tokens: Sequence, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _check_corpus(hyps: Sequence[str], refs: Sequence[str]) -> None:
    if len(hyps) != len(refs):
        raise ValueError(f"hypothesis/reference length mismatch: {len(hyps)} vs {len(refs)}")
    if not hyps:
        raise ValueError("empty corpus: nothing to score")


def corpus_bleu(hyps: Sequence[str], refs: Sequence[str], cfg: MetricConfig | None = None) -> float:
    """Corpus BLEU with clipped n-gram precisions and exponential smoothing.

    p_n sums clipped matches / hypothesis n-grams over the corpus for orders
    1..bleu_max_order; the k-th order with zero matches contributes
    1/(2^k * denominator); BP = 1 if the hypothesis corpus is longer than the
    reference corpus, else exp(1 - r/c); score = 100 * BP * exp(mean ln p_n).
    """
    cfg = cfg if cfg is not None else MetricConfig()
    _check_corpus(hyps, refs)
    tok = _TOKENIZERS[cfg.tokenizer]
    max_order = cfg.bleu_max_order
    correct = [0] * max_order
    total = [0] * max_order
    sys_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        hyp_tokens = tok(hyp)
        ref_tokens = tok(ref)
        sys_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        for n in range(1, max_order + 1):
            hyp_counts = _ngram_counts(hyp_tokens, n)
            if not hyp_counts:
                break
            ref_counts = _ngram_counts(ref_tokens, n)
            total[n - 1] += sum(hyp_counts.values())
            correct[n - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in hyp_counts.items() if gram in ref_counts
            )
    if sys_len == 0:
        logger.warning("corpus_bleu: all hypotheses are empty; score forced to 0.0")
        return 0.0
    smooth = 1.0
    log_sum = 0.0
    effective = 0
    for n in range(max_order):
        if total[n] == 0:
            continue
        effective += 1
        if correct[n] == 0:
            smooth *= 2.0
            precision = 1.0 / (smooth * total[n])
        else:
            precision = correct[n] / total[n]
        log_sum += math.log(precision)
    if effective == 0:
        logger.warning("corpus_bleu: no hypothesis n-grams at any order; score forced to 0.0")
        return 0.0
    bp = 1.0 if sys_len > ref_len else math.exp(1.0 - ref_len / sys_len)
    return min(100.0, 100.0 * bp * math.exp(log_sum / effective))


def chrf(hyps: Sequence[str], refs: Sequence[str], cfg: MetricConfig | None = None) -> float:
    """Character/word n-gram F-beta score, micro-averaged over the corpus.

    Character n-grams of orders 1..chr_char_order are taken over the text
    with all whitespace removed; word n-grams of orders 1..chr_word_order
    over tokenize_intl tokens.  Per order, precision and recall come from
    clipped matches; F_beta = (1+b^2)PR/(b^2 P+R) (0 when P+R=0); the score
    is 100 times the arithmetic mean of F over orders populated on either
    side.  cfg.beta selects the preset: 1.0 for chrF++, 2.0 for chrF2++.
    """
    cfg = cfg if cfg is not None else MetricConfig()
    _check_corpus(hyps, refs)
    orders = cfg.chr_char_order + cfg.chr_word_order
    match = [0] * orders
    hyp_total = [0] * orders
    ref_total = [0] * orders

    def accumulate(bucket: int, hyp_seq: Sequence, ref_seq: Sequence, n: int) -> None:
        hyp_counts = _ngram_counts(hyp_seq, n)
        ref_counts = _ngram_counts(ref_seq, n)
        hyp_total[bucket] += sum(hyp_counts.values())
        ref_total[bucket] += sum(ref_counts.values())
        match[bucket] += sum(
            min(count, ref_counts[gram]) for gram, count in hyp_counts.items() if gram in ref_counts
        )

    for hyp, ref in zip(hyps, refs):
        hyp_chars = "".join(hyp.split())
        ref_chars = "".join(ref.split())
        for n in range(1, cfg.chr_char_order + 1):
            accumulate(n - 1, hyp_chars, ref_chars, n)
        hyp_words = tokenize_intl(hyp)
        ref_words = tokenize_intl(ref)
        for n in range(1, cfg.chr_word_order + 1):
            accumulate(cfg.chr_char_order + n - 1, hyp_words, ref_words, n)

    beta_sq = cfg.beta * cfg.beta
    f_scores = []
    for b in range(orders):
        if hyp_total[b] == 0 and ref_total[b] == 0:
            continue
        precision = match[b] / hyp_total[b] if hyp_total[b] else 0.0
        recall = match[b] / ref_total[b] if ref_total[b] else 0.0
        if precision + recall == 0.0:
            f_scores.append(0.0)
        else:
            f_scores.append((1.0 + beta_sq) * precision * recall / (beta_sq * precision + recall))
    if not f_scores:
        logger.warning("chrf: no n-grams at any order; score forced to 0.0")
        return 0.0
    return min(100.0, 100.0 * sum(f_scores) / len(f_scores))


def cosine_metric(hyp_vectors: Sequence[Sequence[float]], ref_vectors: Sequence[Sequence[float]]) -> float:
    """Mean cosine similarity over aligned embedding pairs."""
    if len(hyp_vectors) != len(ref_vectors):
        raise ValueError(f"embedding list length mismatch: {len(hyp_vectors)} vs {len(ref_vectors)}")
    if not hyp_vectors:
        raise ValueError("no embeddings to compare")
    sims = []
    for idx, (a, b) in enumerate(zip(hyp_vectors, ref_vectors)):
        if len(a) != len(b):
            raise ValueError(f"embedding dimension mismatch at index {idx}: {len(a)} vs {len(b)}")
        norm_a = math.sqrt(sum(x * x for x in a))
        norm_b = math.sqrt(sum(y * y for y in b))
        if norm_a == 0.0 or norm_b == 0.0:
            raise ValueError(f"zero-magnitude embedding at index {idx}")
        sims.append(sum(x * y for x, y in zip(a, b)) / (norm_a * norm_b))
    return sum(sims) / len(sims)


class EmbedClient(Protocol):
    def embed(self, texts: list[str]) -> list[list[float]]: ...


class ScoreClient(Protocol):
    def score_pairs(self, sources: list[str], hypotheses: list[str], references: list[str]) -> list[float]: ...


@dataclass(frozen=True)
class MetricReport:
    """One experiment row: native scores plus optional backend columns."""

    system_name: str
    bleu: float
    chrf_pp: float
    chrf2_pp: float
    cosine_embed: float | None
    learned_score: float | None
    n_instances: int

    def __post_init__(self) -> None:
        if self.n_instances <= 0:
            raise ValueError("a metric report needs at least one scored instance")
        for name in ("bleu", "chrf_pp", "chrf2_pp"):
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise ValueError(f"{name} out of range: {value}")
        if self.cosine_embed is not None and not -1.0 <= self.cosine_embed <= 1.0 + 1e-12:
            raise ValueError(f"cosine_embed out of range: {self.cosine_embed}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "MetricReport":
        return cls(**{name: payload[name] for name in cls.__dataclass_fields__})


def build_report(
    system_name: str,
    hyps: Sequence[str],
    refs: Sequence[str],
    embed_client: EmbedClient | None = None,
    score_client: ScoreClient | None = None,
    sources: Sequence[str] | None = None,
    cfg: MetricConfig | None = None,
) -> MetricReport:
    """Score one system and assemble its report row.

    The optional clients fill the cosine/learned columns; ``sources`` is
    required with ``score_client`` (the learned scorer consumes
    source/hypothesis/reference triples).  Component failures are re-raised
    as ReportColumnError naming the column.
    """
    cfg = cfg if cfg is not None else MetricConfig()
    _check_corpus(hyps, refs)
    hyps = list(hyps)
    refs = list(refs)
    bleu = corpus_bleu(hyps, refs, cfg)
    chrf_pp = chrf(hyps, refs, replace(cfg, beta=1.0))
    chrf2_pp = chrf(hyps, refs, replace(cfg, beta=2.0))

    cosine = None
    if embed_client is not None:
        try:
            cosine = cosine_metric(embed_client.embed(hyps), embed_client.embed(refs))
        except Exception as exc:
            raise ReportColumnError(f"cosine_embed: {exc}") from exc

    learned = None
    if score_client is not None:
        if sources is None:
            raise ValueError("learned_score column requires sources alongside score_client")
        try:
            scores = score_client.score_pairs(list(sources), hyps, refs)
            learned = sum(scores) / len(scores)
        except Exception as exc:
            raise ReportColumnError(f"learned_score: {exc}") from exc

    return MetricReport(
        system_name=system_name,
        bleu=bleu,
        chrf_pp=chrf_pp,
        chrf2_pp=chrf2_pp,
        cosine_embed=cosine,
        learned_score=learned,
        n_instances=len(hyps),
    )

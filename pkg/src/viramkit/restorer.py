"""Trainable punctuation restorer: per-slot token classification.

A slot is the position immediately after a token; each slot gets a label
naming the mark that follows the token (NONE when none).  Labels are derived
from punctuated text, a multiclass averaged perceptron is trained over
sparse indicator features, and predicted labels are re-applied to produce
punctuated text.  Training is single-threaded and bit-reproducible given
(corpus, epochs, seed).
"""

from __future__ import annotations

import json
import random
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import PunctuationInventory, strip_punctuation
from .errors import EmptyInputError, ModelFormatError, ValidationError

NONE_LABEL = "NONE"

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LabelSet:
    """Ordered label inventory plus the surface mark each label inserts.

    NONE comes first; prediction ties resolve to the earliest label, so the
    restorer prefers inserting nothing at equal scores.
    """

    labels: tuple[str, ...]
    surfaces: dict[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "surfaces", dict(self.surfaces))
        if not self.labels or self.labels[0] != NONE_LABEL:
            raise ValidationError(f"label set must start with {NONE_LABEL}")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("duplicate labels in label set")
        if set(self.surfaces) != set(self.labels) - {NONE_LABEL}:
            raise ValidationError("surfaces must cover exactly the non-NONE labels")
        if len(set(self.surfaces.values())) != len(self.surfaces):
            raise ValidationError("surface marks must be distinct")
        object.__setattr__(self, "_by_mark", {mark: label for label, mark in self.surfaces.items()})

    def label_for_mark(self, mark: str) -> str:
        return self._by_mark.get(mark, NONE_LABEL)  # type: ignore[attr-defined]


DEFAULT_LABEL_SET = LabelSet(
    labels=(NONE_LABEL, "COMMA", "PERIOD", "QUESTION", "COLON", "SEMICOLON"),
    surfaces={"COMMA": ",", "PERIOD": ".", "QUESTION": "?", "COLON": ":", "SEMICOLON": ";"},
)


@dataclass(frozen=True)
class LabeledSentence:
    tokens: tuple[str, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.tokens) != len(self.labels):
            raise ValidationError(
                f"token/label length mismatch: {len(self.tokens)} vs {len(self.labels)}"
            )
        if not self.tokens or any(not tok for tok in self.tokens):
            raise ValidationError("tokens must be non-empty strings")


def derive_labels(
    punctuated: str,
    inventory: PunctuationInventory | None = None,
    label_set: LabelSet | None = None,
) -> LabeledSentence:
    """Split a punctuated sentence into stripped tokens plus slot labels.

    Tokens are exactly the whitespace tokens of strip_punctuation(punctuated).
    The first in-inventory mark between token i and token i+1 claims slot i
    (later marks in the same gap are dropped); marks outside the label set map
    to NONE; marks before the first token are dropped.
    """
    inv = inventory if inventory is not None else PunctuationInventory()
    ls = label_set if label_set is not None else DEFAULT_LABEL_SET
    tokens: list[str] = []
    slot_marks: list[str | None] = []
    buf: list[str] = []
    last = len(punctuated) - 1

    def flush() -> None:
        if buf:
            tokens.append("".join(buf))
            slot_marks.append(None)
            buf.clear()

    for i, ch in enumerate(punctuated):
        if ch in inv.marks and not (
            ch in inv.intra_word_keep
            and 0 < i < last
            and punctuated[i - 1].isalpha()
            and punctuated[i + 1].isalpha()
        ):
            flush()
            if slot_marks and slot_marks[-1] is None:
                slot_marks[-1] = ch
        elif ch.isspace():
            flush()
        else:
            buf.append(ch)
    flush()

    if not tokens:
        raise EmptyInputError("sentence reduced to zero tokens after stripping")
    labels = tuple(ls.label_for_mark(m) if m is not None else NONE_LABEL for m in slot_marks)
    return LabeledSentence(tuple(tokens), labels)


_BOS = "<s>"
_EOS = "</s>"


def _length_bucket(n: int) -> str:
    if n == 1:
        return "1"
    if n <= 3:
        return "2-3"
    if n <= 7:
        return "4-7"
    if n <= 15:
        return "8-15"
    return "16+"


def extract_features(tokens: tuple[str, ...] | list[str], i: int) -> dict[str, float]:
    """Sparse indicator features for the slot after tokens[i]."""
    word = tokens[i].lower()
    prev_word = tokens[i - 1].lower() if i > 0 else _BOS
    next_word = tokens[i + 1].lower() if i + 1 < len(tokens) else _EOS
    next2_word = tokens[i + 2].lower() if i + 2 < len(tokens) else _EOS
    feats = {
        "bias": 1.0,
        "w=" + word: 1.0,
        "prev=" + prev_word: 1.0,
        "next=" + next_word: 1.0,
        "next2=" + next2_word: 1.0,
        "suf2=" + word[-2:]: 1.0,
        "suf3=" + word[-3:]: 1.0,
        "len=" + _length_bucket(len(tokens)): 1.0,
    }
    if tokens[i][:1].isupper():
        feats["cap"] = 1.0
    if i + 1 < len(tokens) and tokens[i + 1][:1].isupper():
        feats["next_cap"] = 1.0
    if i == len(tokens) - 1:
        feats["at_end"] = 1.0
    return feats


@dataclass
class RestorerModel:
    """Linear per-slot classifier; immutable once training returns it."""

    weights: dict[str, dict[str, float]]
    averaged_weights: dict[str, dict[str, float]] | None
    label_set: LabelSet
    train_seed: int
    epochs_trained: int


def _argmax(weights: dict[str, dict[str, float]], feats: dict[str, float], labels: tuple[str, ...]) -> str:
    scores = dict.fromkeys(labels, 0.0)
    for feat, value in feats.items():
        by_label = weights.get(feat)
        if not by_label:
            continue
        for label, weight in by_label.items():
            scores[label] += weight * value
    best = labels[0]
    for label in labels[1:]:
        if scores[label] > scores[best]:
            best = label
    return best


def train(
    corpus: list[LabeledSentence],
    epochs: int = 5,
    seed: int = 0,
    label_set: LabelSet | None = None,
) -> RestorerModel:
    """Train a multiclass averaged perceptron over slot features.

    Per epoch, sentences are visited in a seeded shuffled order; each slot
    predicts argmax(weight . features) and on a mistake moves +1 toward the
    gold label and -1 away from the guess.  Averaging uses lazily updated
    running totals so the returned averaged_weights equal the mean of the
    weight vector over all slot updates.
    """
    if not corpus:
        raise ValidationError("training corpus is empty")
    if epochs < 1:
        raise ValidationError(f"epochs must be >= 1, got {epochs}")
    ls = label_set if label_set is not None else DEFAULT_LABEL_SET
    known = set(ls.labels)
    for sent in corpus:
        for label in sent.labels:
            if label not in known:
                raise ValidationError(f"training corpus contains unknown label {label!r}")

    weights: dict[str, dict[str, float]] = {}
    totals: dict[tuple[str, str], float] = defaultdict(float)
    tstamps: dict[tuple[str, str], int] = defaultdict(int)
    t = 0

    def bump(feat: str, label: str, delta: float) -> None:
        by_label = weights.setdefault(feat, {})
        current = by_label.get(label, 0.0)
        key = (feat, label)
        totals[key] += (t - tstamps[key]) * current
        tstamps[key] = t
        by_label[label] = current + delta

    rng = random.Random(seed)
    order = list(range(len(corpus)))
    for _ in range(epochs):
        rng.shuffle(order)
        for idx in order:
            sent = corpus[idx]
            for i, gold in enumerate(sent.labels):
                t += 1
                feats = extract_features(sent.tokens, i)
                guess = _argmax(weights, feats, ls.labels)
                if guess != gold:
                    for feat in feats:
                        bump(feat, gold, +1.0)
                        bump(feat, guess, -1.0)

    averaged: dict[str, dict[str, float]] = {}
    for feat, by_label in weights.items():
        for label, weight in by_label.items():
            key = (feat, label)
            mean = (totals[key] + (t - tstamps[key]) * weight) / t
            if mean != 0.0:
                averaged.setdefault(feat, {})[label] = mean
    return RestorerModel(
        weights=weights,
        averaged_weights=averaged,
        label_set=ls,
        train_seed=seed,
        epochs_trained=epochs,
    )


def predict(model: RestorerModel, tokens: list[str] | tuple[str, ...]) -> list[str]:
    """Per-slot argmax over the averaged weights; ties go to the earliest label."""
    if model.averaged_weights is None:
        raise ValidationError("model is untrained: averaged weights missing")
    if not tokens:
        raise EmptyInputError("cannot predict labels for an empty token list")
    return [
        _argmax(model.averaged_weights, extract_features(tokens, i), model.label_set.labels)
        for i in range(len(tokens))
    ]


def apply_labels(sent: LabeledSentence, label_set: LabelSet | None = None) -> str:
    """Re-insert marks: token + surface for non-NONE labels, single spaces between."""
    ls = label_set if label_set is not None else DEFAULT_LABEL_SET
    parts = []
    for token, label in zip(sent.tokens, sent.labels):
        if label == NONE_LABEL:
            parts.append(token)
        elif label in ls.surfaces:
            parts.append(token + ls.surfaces[label])
        else:
            raise ValidationError(f"label {label!r} has no surface in the label set")
    return " ".join(parts)


def restore(model: RestorerModel, raw_text: str, inventory: PunctuationInventory | None = None) -> str:
    """Strip any existing marks, predict slot labels, and re-punctuate."""
    stripped = strip_punctuation(raw_text, inventory)
    if not stripped:
        raise EmptyInputError("input reduced to nothing after stripping punctuation")
    tokens = stripped.split()
    labels = predict(model, tokens)
    return apply_labels(LabeledSentence(tuple(tokens), tuple(labels)), model.label_set)


@dataclass(frozen=True)
class ClassScores:
    label: str
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    precision_defined: bool


@dataclass(frozen=True)
class RestorerEvaluation:
    per_class: dict[str, ClassScores]
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float


def evaluate_restorer(model: RestorerModel, heldout: list[LabeledSentence]) -> RestorerEvaluation:
    """Per-class and aggregate P/R/F1 over non-NONE slot decisions."""
    if not heldout:
        raise ValidationError("held-out set is empty")
    tp: dict[str, int] = defaultdict(int)
    fp: dict[str, int] = defaultdict(int)
    fn: dict[str, int] = defaultdict(int)
    for sent in heldout:
        predicted = predict(model, sent.tokens)
        for gold, guess in zip(sent.labels, predicted):
            if gold == guess:
                if gold != NONE_LABEL:
                    tp[gold] += 1
            else:
                if guess != NONE_LABEL:
                    fp[guess] += 1
                if gold != NONE_LABEL:
                    fn[gold] += 1

    per_class: dict[str, ClassScores] = {}
    for label in model.label_set.labels:
        if label == NONE_LABEL:
            continue
        t, p, n = tp[label], fp[label], fn[label]
        if t + p + n == 0:
            continue
        precision_defined = (t + p) > 0
        precision = t / (t + p) if precision_defined else 0.0
        recall = t / (t + n) if (t + n) > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class[label] = ClassScores(label, t, p, n, precision, recall, f1, precision_defined)

    macro_f1 = sum(c.f1 for c in per_class.values()) / len(per_class) if per_class else 0.0
    sum_tp = sum(tp.values())
    sum_fp = sum(fp.values())
    sum_fn = sum(fn.values())
    micro_p = sum_tp / (sum_tp + sum_fp) if sum_tp + sum_fp else 0.0
    micro_r = sum_tp / (sum_tp + sum_fn) if sum_tp + sum_fn else 0.0
    micro_f1 = 2 * micro_p * micro_r / (micro_p + micro_r) if micro_p + micro_r else 0.0
    return RestorerEvaluation(per_class, macro_f1, micro_p, micro_r, micro_f1)


def load_labeled_corpus(
    path: str | Path,
    inventory: PunctuationInventory | None = None,
    label_set: LabelSet | None = None,
) -> list[LabeledSentence]:
    """Derive a labeled corpus from a one-punctuated-sentence-per-line file."""
    sentences = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = unicodedata.normalize("NFC", line.strip())
        if line:
            sentences.append(derive_labels(line, inventory, label_set))
    if not sentences:
        raise EmptyInputError(f"{path}: no sentences found")
    return sentences


def save_model(model: RestorerModel, path: str | Path) -> None:
    """Serialize a trained model as versioned JSON (canonical key order)."""
    if model.averaged_weights is None:
        raise ValidationError("refusing to save an untrained model")
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "label_set": {"labels": list(model.label_set.labels), "surfaces": model.label_set.surfaces},
        "seed": model.train_seed,
        "epochs": model.epochs_trained,
        "weights": model.weights,
        "averaged_weights": model.averaged_weights,
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_model(path: str | Path) -> RestorerModel:
    p = Path(path)
    try:
        payload = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{p}: unreadable model file: {exc}") from exc
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"{p}: unsupported format_version {version!r} (expected {MODEL_FORMAT_VERSION})"
        )
    try:
        ls = LabelSet(tuple(payload["label_set"]["labels"]), dict(payload["label_set"]["surfaces"]))
        return RestorerModel(
            weights=payload["weights"],
            averaged_weights=payload["averaged_weights"],
            label_set=ls,
            train_seed=int(payload["seed"]),
            epochs_trained=int(payload["epochs"]),
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"{p}: malformed model file: missing {exc}") from exc

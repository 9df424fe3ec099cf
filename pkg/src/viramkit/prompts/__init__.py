"""Prompt strategies: byte-exact template rendering, shot handling, reply parsing.

Five strategies cover translation prompting with and without explicit
punctuation restoration, zero-shot and three-shot, plus the oracle prompt
used on correctly punctuated input.  Templates live as text resources under
``templates/``; rendering is pure string substitution of the ``{sentence}``
and (for three-shot strategies) ``{shots}`` slots.  Reply parsing is
marker-based with last-occurrence semantics so prompt-echoing models still
parse correctly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib.resources import files

from ..corpus import BenchmarkInstance, PunctuationInventory, strip_punctuation
from ..errors import ReplyParseError, ValidationError

logger = logging.getLogger(__name__)


class Strategy(Enum):
    ZERO_SHOT_RESTORE_THEN_TRANSLATE = "zero_restore"
    ZERO_SHOT_DIRECT = "zero_direct"
    THREE_SHOT_RESTORE_THEN_TRANSLATE = "three_restore"
    THREE_SHOT_DIRECT = "three_direct"
    ORACLE_DIRECT = "oracle_direct"

    @property
    def shot_count(self) -> int:
        return 3 if self in _THREE_SHOT else 0

    @property
    def restores(self) -> bool:
        """True when the strategy asks for restoration before translation."""
        return self in _RESTORE


_THREE_SHOT = {Strategy.THREE_SHOT_RESTORE_THEN_TRANSLATE, Strategy.THREE_SHOT_DIRECT}
_RESTORE = {Strategy.ZERO_SHOT_RESTORE_THEN_TRANSLATE, Strategy.THREE_SHOT_RESTORE_THEN_TRANSLATE}

#: Benchmark ids of the default three shots (colon, comma, semicolon), in
#: the order the few-shot prompts enumerate them.
DEFAULT_SHOT_IDS = ("viram-003", "viram-001", "viram-002")


@dataclass(frozen=True)
class ShotExample:
    english_written: str
    english_meant: str
    marathi: str

    def __post_init__(self) -> None:
        for name in ("english_written", "english_meant", "marathi"):
            if not getattr(self, name).strip():
                raise ValidationError(f"shot example field {name!r} is empty")
        bare = PunctuationInventory().without_keeps()
        if strip_punctuation(self.english_written, bare) != strip_punctuation(self.english_meant, bare):
            raise ValidationError("shot written/meant forms differ by more than punctuation")

    @classmethod
    def from_instance(cls, inst: BenchmarkInstance) -> "ShotExample":
        return cls(inst.english_written, inst.english_meant, inst.marathi_meant)


@dataclass(frozen=True)
class ParsedReply:
    restored_english: str | None
    marathi: str
    raw: str


@lru_cache(maxsize=None)
def _template(strategy: Strategy) -> str:
    return files("viramkit.prompts").joinpath("templates", f"{strategy.value}.txt").read_text(
        encoding="utf-8"
    )


def format_shots(shots: tuple[ShotExample, ...] | list[ShotExample]) -> str:
    """Serialize shots in the enumerated prompt layout."""
    blocks = []
    for k, shot in enumerate(shots, start=1):
        blocks.append(
            f"{k}. Input English:\n{shot.english_written}\n\n"
            f"English Meant:\n{shot.english_meant}\n\n"
            f"Marathi Translation:\n{shot.marathi}"
        )
    return "\n\n".join(blocks)


def render_prompt(strategy: Strategy, sentence: str, shots: list[ShotExample] | tuple = ()) -> str:
    """Fill the strategy's template; pure substitution, no reflowing."""
    if not sentence.strip():
        raise ValueError("sentence must be non-empty")
    if len(shots) != strategy.shot_count:
        raise ValueError(
            f"strategy {strategy.value!r} expects {strategy.shot_count} shots, got {len(shots)}"
        )
    rendered = _template(strategy)
    if strategy.shot_count:
        rendered = rendered.replace("{shots}", format_shots(shots))
    return rendered.replace("{sentence}", sentence)


def select_and_exclude_shots(
    benchmark: list[BenchmarkInstance], shot_ids: list[str] | tuple[str, ...]
) -> tuple[list[ShotExample], list[BenchmarkInstance]]:
    """Build shots from the named instances and drop them from the eval set."""
    ids = list(shot_ids)
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate shot ids: {ids}")
    by_id = {inst.id: inst for inst in benchmark}
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise ValueError(f"shot ids not found in benchmark: {missing}")
    shots = [ShotExample.from_instance(by_id[i]) for i in ids]
    excluded = set(ids)
    eval_set = [inst for inst in benchmark if inst.id not in excluded]
    return shots, eval_set


MARKER_RESTORATION = "Step 1 (Restoration):"
MARKER_TRANSLATION = "Step 2 (Translation):"
MARKER_REASONING = "Reasoning:"
MARKER_DIRECT = "Marathi Translation (Devanagari Script):"

_ALL_MARKERS = (MARKER_RESTORATION, MARKER_TRANSLATION, MARKER_REASONING, MARKER_DIRECT)


def _clean_span(span: str) -> str:
    text = span.strip()
    lines = [line for line in text.splitlines() if not line.strip().startswith("```")]
    text = "\n".join(lines).strip()
    for wrapper in ("**", "`"):
        if text.startswith(wrapper) and text.endswith(wrapper) and len(text) > 2 * len(wrapper):
            text = text[len(wrapper) : -len(wrapper)].strip()
    return text


def _after_last_marker(raw: str, marker: str) -> str | None:
    """Text after the LAST occurrence of marker, up to the next labeled line."""
    idx = raw.rfind(marker)
    if idx == -1:
        return None
    tail = raw[idx + len(marker) :]
    kept = []
    for j, line in enumerate(tail.splitlines()):
        if j > 0 and any(line.lstrip().startswith(m) for m in _ALL_MARKERS):
            break
        kept.append(line)
    return _clean_span("\n".join(kept))


def contains_devanagari(text: str) -> bool:
    return any("ऀ" <= ch <= "ॿ" for ch in text)


def parse_reply(strategy: Strategy, raw: str) -> ParsedReply:
    """Extract the restored English and/or Marathi spans from a model reply.

    Restore-then-translate strategies require both step markers; direct
    strategies require the Marathi marker.  Extraction always uses the last
    marker occurrence, so replies that echo the prompt (whose response-format
    section contains the marker strings) still resolve to the model's answer.
    """
    if not raw.strip():
        raise ReplyParseError("empty reply", raw=raw)
    if strategy.restores:
        restored = _after_last_marker(raw, MARKER_RESTORATION)
        marathi = _after_last_marker(raw, MARKER_TRANSLATION)
        if restored is None or not restored:
            raise ReplyParseError(f"reply lacks {MARKER_RESTORATION!r} content", raw=raw)
        if marathi is None or not marathi:
            raise ReplyParseError(f"reply lacks {MARKER_TRANSLATION!r} content", raw=raw)
        return ParsedReply(restored_english=restored, marathi=marathi, raw=raw)
    marathi = _after_last_marker(raw, MARKER_DIRECT)
    if marathi is None or not marathi:
        raise ReplyParseError(f"reply lacks {MARKER_DIRECT!r} content", raw=raw)
    return ParsedReply(restored_english=None, marathi=marathi, raw=raw)

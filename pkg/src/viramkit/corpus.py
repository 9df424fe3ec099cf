"""Benchmark data model, punctuation stripping, and fine-tuning corpus variants.

The benchmark couples three strings per instance: the punctuation-ambiguous
English surface form (``english_written``), its disambiguated punctuated form
(``english_meant``), and the Marathi reference for the meant reading
(``marathi_meant``).  The parallel-corpus side builds the four fine-tuning
variants of a punctuated source corpus: unchanged, fully stripped, both
concatenated, and alternating by index.
"""

from __future__ import annotations

import json
import logging
import unicodedata
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import BenchmarkFormatError, ValidationError

logger = logging.getLogger(__name__)

BENCHMARK_FIELDS = ("id", "english_written", "english_meant", "marathi_meant", "punctuation_type")

#: Ambiguity classes present in the benchmark.
PUNCTUATION_TYPES = frozenset({
    "Comma",
    "Colon",
    "Hyphen",
    "Parentheses",
    "Quotation Marks",
    "Em Dash",
    "Question Mark",
    "Semi Colon",
    "Slash",
})

# — em dash, – en dash, … horizontal ellipsis
DEFAULT_MARKS = frozenset({".", ",", ";", ":", "?", "!", '"', "'", "(", ")", "—", "–", "-", "/", "…"})
DEFAULT_INTRA_WORD_KEEP = frozenset({"'", "-"})


@dataclass(frozen=True)
class PunctuationInventory:
    """Marks removed by stripping, and the subset kept when inside a word.

    ``intra_word_keep`` marks survive only when flanked by letters on both
    sides ("Let's", "state-of-the-art"); it may be empty to disable keeping.
    """

    marks: frozenset[str] = DEFAULT_MARKS
    intra_word_keep: frozenset[str] = DEFAULT_INTRA_WORD_KEEP

    def __post_init__(self) -> None:
        object.__setattr__(self, "marks", frozenset(self.marks))
        object.__setattr__(self, "intra_word_keep", frozenset(self.intra_word_keep))
        if not self.marks:
            raise ValidationError("punctuation inventory needs at least one mark")
        bad = [m for m in self.marks if len(m) != 1]
        if bad:
            raise ValidationError(f"marks must be single characters, got {sorted(bad)!r}")
        extra = self.intra_word_keep - self.marks
        if extra:
            raise ValidationError(f"intra_word_keep marks missing from inventory: {sorted(extra)!r}")

    def without_keeps(self) -> "PunctuationInventory":
        """The same inventory with intra-word keeping disabled (pure removal)."""
        return PunctuationInventory(self.marks, frozenset())


def strip_punctuation(text: str, inventory: PunctuationInventory | None = None) -> str:
    """Remove inventory marks from ``text`` and normalize whitespace.

    Marks in ``intra_word_keep`` are preserved when the neighbouring
    characters on both sides are letters; every other inventory mark is
    replaced by a space.  Runs of whitespace collapse to single spaces and
    the result is trimmed.  Letters and their order are never touched.
    """
    inv = inventory if inventory is not None else PunctuationInventory()
    last = len(text) - 1
    kept: list[str] = []
    for i, ch in enumerate(text):
        if ch in inv.marks:
            if (
                ch in inv.intra_word_keep
                and 0 < i < last
                and text[i - 1].isalpha()
                and text[i + 1].isalpha()
            ):
                kept.append(ch)
            else:
                kept.append(" ")
        else:
            kept.append(ch)
    return " ".join("".join(kept).split())


def normalize_ws(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim the ends."""
    return " ".join(text.split())


@dataclass(frozen=True)
class BenchmarkInstance:
    id: str
    english_written: str
    english_meant: str
    marathi_meant: str
    punctuation_type: str


def validate_instance(inst: BenchmarkInstance, inventory: PunctuationInventory | None = None) -> None:
    """Check one instance against the benchmark invariants.

    The written/meant consistency check strips with intra-word keeping
    disabled so instances whose ambiguity class is itself an intra-word mark
    (hyphens) still compare equal.
    """
    for name in ("id", "english_written", "english_meant", "marathi_meant"):
        if not getattr(inst, name).strip():
            raise ValidationError(f"instance {inst.id!r}: empty field {name!r}")
    if inst.punctuation_type not in PUNCTUATION_TYPES:
        raise ValidationError(
            f"instance {inst.id!r}: unknown punctuation_type {inst.punctuation_type!r}"
        )
    bare = (inventory if inventory is not None else PunctuationInventory()).without_keeps()
    if strip_punctuation(inst.english_written, bare) != strip_punctuation(inst.english_meant, bare):
        raise ValidationError(
            f"instance {inst.id!r}: english_written and english_meant differ by more than punctuation"
        )


def _nfc(value: str) -> str:
    return unicodedata.normalize("NFC", value)


def load_benchmark(path: str | Path, format: str | None = None) -> list[BenchmarkInstance]:
    """Load benchmark instances from a TSV or JSONL file, in file order.

    ``format`` is "tsv" or "jsonl"; when omitted it is inferred from the
    file suffix.  All fields are NFC-normalized and every instance is
    validated.
    """
    p = Path(path)
    fmt = format or ("jsonl" if p.suffix.lower() in {".jsonl", ".ndjson"} else "tsv")
    if fmt not in {"tsv", "jsonl"}:
        raise ValueError(f"unknown benchmark format {fmt!r}")
    lines = p.read_text(encoding="utf-8").splitlines()

    instances: list[BenchmarkInstance] = []
    if fmt == "tsv":
        if not lines:
            raise BenchmarkFormatError(f"{p}: empty file, expected header {'|'.join(BENCHMARK_FIELDS)}")
        if tuple(lines[0].split("\t")) != BENCHMARK_FIELDS:
            raise BenchmarkFormatError(f"{p}: bad header {lines[0]!r}")
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != len(BENCHMARK_FIELDS):
                raise BenchmarkFormatError(
                    f"{p} line {lineno}: expected {len(BENCHMARK_FIELDS)} tab-separated fields, got {len(parts)}"
                )
            instances.append(BenchmarkInstance(*(_nfc(v) for v in parts)))
    else:
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise BenchmarkFormatError(f"{p} line {lineno}: invalid JSON: {exc}") from exc
            for name in BENCHMARK_FIELDS:
                if name not in obj:
                    raise BenchmarkFormatError(f"{p} line {lineno}: missing field {name!r}")
            instances.append(BenchmarkInstance(**{name: _nfc(str(obj[name])) for name in BENCHMARK_FIELDS}))

    for inst in instances:
        validate_instance(inst)
    logger.info("loaded %d benchmark instances from %s", len(instances), p)
    return instances


def dump_benchmark(instances: list[BenchmarkInstance], path: str | Path, format: str | None = None) -> None:
    """Write instances back out in the same TSV/JSONL shapes load accepts."""
    p = Path(path)
    fmt = format or ("jsonl" if p.suffix.lower() in {".jsonl", ".ndjson"} else "tsv")
    if fmt == "tsv":
        rows = ["\t".join(BENCHMARK_FIELDS)]
        rows += ["\t".join(getattr(i, name) for name in BENCHMARK_FIELDS) for i in instances]
        p.write_text("\n".join(rows) + "\n", encoding="utf-8")
    elif fmt == "jsonl":
        rows = [
            json.dumps({name: getattr(i, name) for name in BENCHMARK_FIELDS}, ensure_ascii=False)
            for i in instances
        ]
        p.write_text("\n".join(rows) + ("\n" if rows else ""), encoding="utf-8")
    else:
        raise ValueError(f"unknown benchmark format {fmt!r}")


def load_packaged_fixture() -> list[BenchmarkInstance]:
    """The three-instance benchmark fixture shipped with the package."""
    from importlib.resources import as_file, files

    resource = files("viramkit").joinpath("data", "viram_fixture.tsv")
    with as_file(resource) as p:
        return load_benchmark(p, format="tsv")


def corpus_stats(instances: list[BenchmarkInstance]) -> dict[str, int]:
    """Count instances per punctuation type, ordered by count desc, then name."""
    counts = Counter(inst.punctuation_type for inst in instances)
    return dict(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))


class VariantKind(Enum):
    WITH_PUNCT = "with"
    WITHOUT_PUNCT = "without"
    COMBINED_2X = "combined2x"
    ALTERNATE_X = "alternate"


@dataclass(frozen=True)
class ParallelPair:
    source: str
    target: str


@dataclass
class ParallelCorpus:
    name: str
    variant: VariantKind
    pairs: list[ParallelPair]


def make_variant(
    base: ParallelCorpus,
    kind: VariantKind,
    inventory: PunctuationInventory | None = None,
) -> ParallelCorpus:
    """Build one fine-tuning variant from a punctuated base corpus.

    WithPunct copies, WithoutPunct strips every source, Combined2x appends
    the stripped pairs after the originals (doubling the size), AlternateX
    keeps punctuation at even 0-based indices and strips odd ones.  Targets
    are never modified.
    """
    if base.variant is not VariantKind.WITH_PUNCT:
        raise ValidationError(
            f"variants derive from a {VariantKind.WITH_PUNCT.value!r} corpus, got {base.variant.value!r}"
        )
    inv = inventory if inventory is not None else PunctuationInventory()

    def stripped(pair: ParallelPair) -> ParallelPair:
        return ParallelPair(strip_punctuation(pair.source, inv), pair.target)

    if kind is VariantKind.WITH_PUNCT:
        pairs = list(base.pairs)
    elif kind is VariantKind.WITHOUT_PUNCT:
        pairs = [stripped(p) for p in base.pairs]
    elif kind is VariantKind.COMBINED_2X:
        pairs = list(base.pairs) + [stripped(p) for p in base.pairs]
    elif kind is VariantKind.ALTERNATE_X:
        pairs = [p if i % 2 == 0 else stripped(p) for i, p in enumerate(base.pairs)]
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown variant kind {kind!r}")
    return ParallelCorpus(base.name, kind, pairs)


def load_parallel_corpus(
    src_path: str | Path,
    tgt_path: str | Path,
    name: str | None = None,
    variant: VariantKind = VariantKind.WITH_PUNCT,
) -> ParallelCorpus:
    """Read two aligned one-sentence-per-line files into a corpus."""
    src_p, tgt_p = Path(src_path), Path(tgt_path)
    src_lines = src_p.read_text(encoding="utf-8").splitlines()
    tgt_lines = tgt_p.read_text(encoding="utf-8").splitlines()
    if len(src_lines) != len(tgt_lines):
        raise ValidationError(
            f"misaligned corpus: {src_p} has {len(src_lines)} lines, {tgt_p} has {len(tgt_lines)}"
        )
    pairs: list[ParallelPair] = []
    for lineno, (s, t) in enumerate(zip(src_lines, tgt_lines), start=1):
        s, t = _nfc(s.strip()), _nfc(t.strip())
        if not s or not t:
            raise ValidationError(f"empty source or target at line {lineno}")
        pairs.append(ParallelPair(s, t))
    return ParallelCorpus(name or src_p.stem, variant, pairs)


def save_parallel_corpus(corpus: ParallelCorpus, out_dir: str | Path, stem: str | None = None) -> Path:
    """Write ``<stem>.src``, ``<stem>.tgt`` and a ``<stem>.meta.json`` sidecar.

    The sidecar records the variant and the base corpus name so provenance
    survives the round trip.  Returns the sidecar path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = stem or f"{corpus.name}.{corpus.variant.value}"
    (out / f"{stem}.src").write_text(
        "".join(p.source + "\n" for p in corpus.pairs), encoding="utf-8"
    )
    (out / f"{stem}.tgt").write_text(
        "".join(p.target + "\n" for p in corpus.pairs), encoding="utf-8"
    )
    meta = {"base": corpus.name, "variant": corpus.variant.value, "pairs": len(corpus.pairs)}
    meta_path = out / f"{stem}.meta.json"
    meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return meta_path
